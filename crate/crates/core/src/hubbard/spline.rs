//! Bicubic spline table of the two-band hopping J(V_s, V_l).
//!
//! Converting depths to J through a band solve at every optimizer iteration
//! is wasteful; instead J is tabulated once on a rectangular grid and fitted
//! with a tensor-product natural cubic spline of degree three. Evaluation
//! interpolates row splines along V_s and a column spline along V_l; both
//! the value and the analytic gradient are available anywhere strictly
//! inside the domain. Queries outside the domain are errors, never
//! extrapolated.

use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{DepthPoint, LatticeConfig};

/// 1D natural cubic spline through (x_i, y_i) with ascending distinct knots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn fit(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(Error::InvalidConfig(
                "cubic spline needs at least three knots".into(),
            ));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("spline knots must ascend".into()));
        }
        // Tridiagonal system for natural boundary conditions m_0 = m_{n-1} = 0.
        let mut sub = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            sub[i] = h0 / 6.0;
            diag[i] = (h0 + h1) / 3.0;
            sup[i] = h1 / 6.0;
            rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        }
        // Thomas algorithm.
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
        }
        Ok(Self { x, y, m })
    }

    fn segment(&self, xq: f64) -> usize {
        match self
            .x
            .binary_search_by(|v| v.partial_cmp(&xq).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.x.len() - 2),
        }
    }

    pub fn value(&self, xq: f64) -> f64 {
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - xq) / h;
        let b = (xq - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a.powi(3) - a) * self.m[i] + (b.powi(3) - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, xq: f64) -> f64 {
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - xq) / h;
        let b = (xq - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + ((3.0 * b * b - 1.0) * self.m[i + 1] - (3.0 * a * a - 1.0) * self.m[i]) * h / 6.0
    }
}

/// Tensor-product cubic spline of J over a (V_s, V_l) grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplineTable {
    pub vs_nodes: Vec<f64>,
    pub vl_nodes: Vec<f64>,
    /// Row-major values: `values[r][c] = J(vs_nodes[c], vl_nodes[r])`.
    pub values: Vec<Vec<f64>>,
    /// One spline along V_s per V_l row.
    row_splines: Vec<CubicSpline>,
    /// Largest node reproduction error, reported at build time.
    pub residual: f64,
    /// Hash of the lattice configuration the table was built for.
    pub config_tag: String,
}

impl SplineTable {
    pub fn from_grid(
        vs_nodes: Vec<f64>,
        vl_nodes: Vec<f64>,
        values: Vec<Vec<f64>>,
        config_tag: String,
    ) -> Result<Self> {
        if vs_nodes.len() < 4 || vl_nodes.len() < 4 {
            return Err(Error::InvalidConfig(
                "spline table needs at least 4 nodes per axis".into(),
            ));
        }
        if values.len() != vl_nodes.len() || values.iter().any(|r| r.len() != vs_nodes.len()) {
            return Err(Error::DimensionMismatch("spline value grid".into()));
        }
        let row_splines = values
            .iter()
            .map(|row| CubicSpline::fit(vs_nodes.clone(), row.clone()))
            .collect::<Result<Vec<_>>>()?;
        let mut table = Self {
            vs_nodes,
            vl_nodes,
            values,
            row_splines,
            residual: 0.0,
            config_tag,
        };
        let mut residual: f64 = 0.0;
        for (r, &vl) in table.vl_nodes.clone().iter().enumerate() {
            for (c, &vs) in table.vs_nodes.clone().iter().enumerate() {
                let err = (table.value(vs, vl).unwrap() - table.values[r][c]).abs();
                residual = residual.max(err);
            }
        }
        table.residual = residual;
        Ok(table)
    }

    pub fn domain(&self) -> (f64, f64, f64, f64) {
        (
            self.vs_nodes[0],
            *self.vs_nodes.last().unwrap(),
            self.vl_nodes[0],
            *self.vl_nodes.last().unwrap(),
        )
    }

    pub fn contains(&self, vs: f64, vl: f64) -> bool {
        let (vs_min, vs_max, vl_min, vl_max) = self.domain();
        vs >= vs_min && vs <= vs_max && vl >= vl_min && vl <= vl_max
    }

    fn check_domain(&self, vs: f64, vl: f64) -> Result<()> {
        if !self.contains(vs, vl) {
            let (vs_min, vs_max, vl_min, vl_max) = self.domain();
            return Err(Error::OutOfDomain {
                vs,
                vl,
                vs_min,
                vs_max,
                vl_min,
                vl_max,
            });
        }
        Ok(())
    }

    /// J at an interior point.
    pub fn value(&self, vs: f64, vl: f64) -> Result<f64> {
        self.check_domain(vs, vl)?;
        let col: Vec<f64> = self.row_splines.iter().map(|s| s.value(vs)).collect();
        Ok(CubicSpline::fit(self.vl_nodes.clone(), col)?.value(vl))
    }

    /// (dJ/dV_s, dJ/dV_l) at an interior point. The V_s derivative uses the
    /// row-spline derivatives (spline construction is linear in node values),
    /// the V_l derivative differentiates the column spline.
    pub fn gradient(&self, vs: f64, vl: f64) -> Result<(f64, f64)> {
        self.check_domain(vs, vl)?;
        let col: Vec<f64> = self.row_splines.iter().map(|s| s.value(vs)).collect();
        let col_d: Vec<f64> = self.row_splines.iter().map(|s| s.derivative(vs)).collect();
        let d_vl = CubicSpline::fit(self.vl_nodes.clone(), col)?.derivative(vl);
        let d_vs = CubicSpline::fit(self.vl_nodes.clone(), col_d)?.value(vl);
        Ok((d_vs, d_vl))
    }

    pub fn value_and_gradient(&self, vs: f64, vl: f64) -> Result<(f64, f64, f64)> {
        self.check_domain(vs, vl)?;
        let col: Vec<f64> = self.row_splines.iter().map(|s| s.value(vs)).collect();
        let col_d: Vec<f64> = self.row_splines.iter().map(|s| s.derivative(vs)).collect();
        let col_spline = CubicSpline::fit(self.vl_nodes.clone(), col)?;
        let d_vs = CubicSpline::fit(self.vl_nodes.clone(), col_d)?.value(vl);
        Ok((col_spline.value(vl), d_vs, col_spline.derivative(vl)))
    }

    /// Versioned CSV cache: header lines carry the grid spec, residual, and
    /// configuration tag; data rows are `vl, vs, j`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "# dwell-spline-table v1")?;
        writeln!(f, "# config {}", self.config_tag)?;
        writeln!(
            f,
            "# grid {} {} residual {:.3e}",
            self.vs_nodes.len(),
            self.vl_nodes.len(),
            self.residual
        )?;
        writeln!(f, "v_l_erl,v_s_ers,j_angular_khz")?;
        for (r, &vl) in self.vl_nodes.iter().enumerate() {
            for (c, &vs) in self.vs_nodes.iter().enumerate() {
                writeln!(f, "{:.12e},{:.12e},{:.15e}", vl, vs, self.values[r][c])?;
            }
        }
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut lines = f.lines();
        let magic = lines
            .next()
            .ok_or_else(|| Error::TableFormat("empty file".into()))??;
        if magic.trim() != "# dwell-spline-table v1" {
            return Err(Error::TableFormat(format!("bad magic line: {magic}")));
        }
        let config_line = lines
            .next()
            .ok_or_else(|| Error::TableFormat("missing config line".into()))??;
        let config_tag = config_line
            .trim()
            .strip_prefix("# config ")
            .ok_or_else(|| Error::TableFormat("missing config tag".into()))?
            .to_string();
        lines.next(); // grid spec line, re-derived below
        lines.next(); // column header
        let mut triples = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let vl: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::TableFormat(format!("bad row: {line}")))?;
            let vs: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::TableFormat(format!("bad row: {line}")))?;
            let j: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::TableFormat(format!("bad row: {line}")))?;
            triples.push((vl, vs, j));
        }
        let mut vl_nodes: Vec<f64> = triples.iter().map(|t| t.0).collect();
        vl_nodes.dedup();
        let n_vl = vl_nodes.len();
        if n_vl == 0 || triples.len() % n_vl != 0 {
            return Err(Error::TableFormat("inconsistent grid".into()));
        }
        let n_vs = triples.len() / n_vl;
        let vs_nodes: Vec<f64> = triples.iter().take(n_vs).map(|t| t.1).collect();
        let values: Vec<Vec<f64>> = (0..n_vl)
            .map(|r| (0..n_vs).map(|c| triples[r * n_vs + c].2).collect())
            .collect();
        Self::from_grid(vs_nodes, vl_nodes, values, config_tag)
    }
}

/// Short tag identifying a lattice configuration in cache files.
pub fn config_tag(config: &LatticeConfig) -> String {
    format!(
        "ls{:.6}-ll{:.6}-th{:.6}-m{:.6e}-ph{:.6}",
        config.lambda_s_nm,
        config.lambda_l_nm,
        config.tilt_angle_deg,
        config.species_mass_kg,
        config.relative_phase
    )
}

/// Tabulate J on an n_vs x n_vl grid and fit the bicubic surface. Nodes are
/// solved in parallel.
pub fn build_spline_table(
    config: &LatticeConfig,
    vs_range: (f64, f64),
    vl_range: (f64, f64),
    n_vs: usize,
    n_vl: usize,
) -> Result<SplineTable> {
    if n_vs < 4 || n_vl < 4 {
        return Err(Error::InvalidConfig(
            "spline grid needs at least 4 nodes per axis".into(),
        ));
    }
    if vs_range.1 <= vs_range.0 || vl_range.1 <= vl_range.0 {
        return Err(Error::InvalidConfig("empty spline range".into()));
    }
    let geom = config.geometry()?;
    let vs_nodes: Vec<f64> = (0..n_vs)
        .map(|i| vs_range.0 + (vs_range.1 - vs_range.0) * i as f64 / (n_vs - 1) as f64)
        .collect();
    let vl_nodes: Vec<f64> = (0..n_vl)
        .map(|i| vl_range.0 + (vl_range.1 - vl_range.0) * i as f64 / (n_vl - 1) as f64)
        .collect();
    let values: Vec<Vec<f64>> = vl_nodes
        .par_iter()
        .map(|&vl| {
            vs_nodes
                .iter()
                .map(|&vs| {
                    super::two_band_hopping(
                        &geom,
                        &DepthPoint::with_phase(vs, vl, config.relative_phase),
                        crate::lattice::DEFAULT_L,
                        crate::lattice::DEFAULT_F_MAX,
                    )
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    SplineTable::from_grid(vs_nodes, vl_nodes, values, config_tag(config))
}

/// Build the table or load it from a cache file keyed by the configuration.
pub fn cached_spline_table(
    config: &LatticeConfig,
    vs_range: (f64, f64),
    vl_range: (f64, f64),
    n_vs: usize,
    n_vl: usize,
    cache_dir: &Path,
) -> Result<SplineTable> {
    std::fs::create_dir_all(cache_dir)?;
    let name = format!(
        "spline-{}-vs{:.3}-{:.3}x{}-vl{:.3}-{:.3}x{}.csv",
        config_tag(config),
        vs_range.0,
        vs_range.1,
        n_vs,
        vl_range.0,
        vl_range.1,
        n_vl
    );
    let path = cache_dir.join(name);
    if path.exists() {
        if let Ok(table) = SplineTable::read_csv(&path) {
            if table.config_tag == config_tag(config) {
                return Ok(table);
            }
        }
    }
    let table = build_spline_table(config, vs_range, vl_range, n_vs, n_vl)?;
    table.write_csv(&path)?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn analytic_table() -> SplineTable {
        // smooth synthetic surface on a modest grid
        let vs: Vec<f64> = (0..24).map(|i| 2.0 + i as f64 * 28.0 / 23.0).collect();
        let vl: Vec<f64> = (0..20).map(|i| 30.0 + i as f64).collect();
        let f = |x: f64, y: f64| (-0.25 * x).exp() * (1.0 + 0.02 * y) + 0.001 * x * y;
        let values: Vec<Vec<f64>> = vl
            .iter()
            .map(|&y| vs.iter().map(|&x| f(x, y)).collect())
            .collect();
        SplineTable::from_grid(vs, vl, values, "test".into()).unwrap()
    }

    #[test]
    fn nodes_are_reproduced_within_reported_residual() {
        let t = analytic_table();
        assert!(t.residual < 1e-12);
        for (r, &vl) in t.vl_nodes.iter().enumerate() {
            for (c, &vs) in t.vs_nodes.iter().enumerate() {
                let v = t.value(vs, vl).unwrap();
                assert!((v - t.values[r][c]).abs() <= t.residual + 1e-14);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_difference_of_the_spline() {
        let t = analytic_table();
        let pts = [(5.3, 33.7), (17.9, 44.2), (28.1, 31.5), (9.0, 48.6)];
        let h = 1e-4;
        for &(vs, vl) in &pts {
            let (gvs, gvl) = t.gradient(vs, vl).unwrap();
            let fd_vs = (t.value(vs + h, vl).unwrap() - t.value(vs - h, vl).unwrap()) / (2.0 * h);
            let fd_vl = (t.value(vs, vl + h).unwrap() - t.value(vs, vl - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(gvs, fd_vs, max_relative = 1e-6);
            assert_relative_eq!(gvl, fd_vl, max_relative = 1e-6);
        }
    }

    #[test]
    fn out_of_domain_queries_error_instead_of_extrapolating() {
        let t = analytic_table();
        assert!(matches!(
            t.value(1.0, 35.0),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            t.gradient(10.0, 55.0),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn csv_round_trip_preserves_the_table() {
        let t = analytic_table();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        t.write_csv(&path).unwrap();
        let back = SplineTable::read_csv(&path).unwrap();
        assert_eq!(back.vs_nodes.len(), t.vs_nodes.len());
        assert_eq!(back.vl_nodes.len(), t.vl_nodes.len());
        assert_eq!(back.config_tag, t.config_tag);
        let v0 = t.value(12.3, 41.2).unwrap();
        let v1 = back.value(12.3, 41.2).unwrap();
        assert_relative_eq!(v0, v1, max_relative = 1e-12);
    }
}
