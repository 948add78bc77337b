//! Ordinary least squares with stepwise variable selection, for regressing
//! scaling exponents on per-stock covariates.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Named covariate columns plus a response vector, one row per stock.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub names: Vec<String>,
    /// Column-major covariates; `columns[j]` belongs to `names[j]`.
    pub columns: Vec<Vec<f64>>,
    pub response: Vec<f64>,
}

impl DesignMatrix {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>, response: Vec<f64>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::InvalidConfig(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let n = response.len();
        if n == 0 {
            return Err(Error::EmptySeries);
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::InvalidConfig(format!(
                    "column {name} has {} rows, response has {n}",
                    col.len()
                )));
            }
        }
        let finite = |v: &f64| v.is_finite();
        if !response.iter().all(finite) || !columns.iter().flatten().all(finite) {
            return Err(Error::InvalidConfig(
                "design contains non-finite cells".into(),
            ));
        }
        Ok(Self {
            names,
            columns,
            response,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.response.len()
    }

    /// Copy with every covariate z-scored; the response is untouched.
    /// Selection and p-values are invariant under this rescaling.
    pub fn standardized(&self) -> DesignMatrix {
        let n = self.n_rows() as f64;
        let columns = self
            .columns
            .iter()
            .map(|col| {
                let mean = col.iter().sum::<f64>() / n;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                let sd = var.sqrt();
                if sd == 0.0 {
                    col.clone()
                } else {
                    col.iter().map(|v| (v - mean) / sd).collect()
                }
            })
            .collect();
        DesignMatrix {
            names: self.names.clone(),
            columns,
            response: self.response.clone(),
        }
    }

    fn subset(&self, indices: &[usize]) -> DesignMatrix {
        DesignMatrix {
            names: indices.iter().map(|&j| self.names[j].clone()).collect(),
            columns: indices.iter().map(|&j| self.columns[j].clone()).collect(),
            response: self.response.clone(),
        }
    }
}

/// Fitted model: intercept first in `beta` and `p_values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub selected: Vec<String>,
    pub beta: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r2: f64,
    pub adj_r2: f64,
    pub n_rows: usize,
}

/// Least squares of the response on an intercept plus every column of `x`,
/// with two-sided t-test p-values and adjusted R².
#[allow(clippy::needless_range_loop)] // indexed loops mirror the matrix algebra
pub fn ols_fit(x: &DesignMatrix) -> Result<RegressionResult> {
    let n = x.n_rows();
    let k = x.columns.len();
    if n < k + 2 {
        return Err(Error::InsufficientPoints {
            found: n,
            needed: k + 2,
        });
    }

    // Normal equations over [1 | X].
    let dim = k + 1;
    let col = |j: usize, i: usize| -> f64 {
        if j == 0 {
            1.0
        } else {
            x.columns[j - 1][i]
        }
    };
    let mut xtx = vec![vec![0.0_f64; dim]; dim];
    let mut xty = vec![0.0_f64; dim];
    for i in 0..n {
        for a in 0..dim {
            let va = col(a, i);
            xty[a] += va * x.response[i];
            for b in a..dim {
                xtx[a][b] += va * col(b, i);
            }
        }
    }
    for a in 0..dim {
        for b in 0..a {
            xtx[a][b] = xtx[b][a];
        }
    }

    let inv = invert(&xtx)?;
    let beta: Vec<f64> = (0..dim)
        .map(|a| (0..dim).map(|b| inv[a][b] * xty[b]).sum())
        .collect();

    let mut rss = 0.0;
    let mut tss = 0.0;
    let mean_y = x.response.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        let fit: f64 = (0..dim).map(|a| beta[a] * col(a, i)).sum();
        rss += (x.response[i] - fit).powi(2);
        tss += (x.response[i] - mean_y).powi(2);
    }
    let r2 = if tss > 0.0 {
        (1.0 - rss / tss).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let df = (n - dim) as f64;
    let adj_r2 = 1.0 - (1.0 - r2) * (n as f64 - 1.0) / df;

    let sigma2 = rss / df;
    let t_dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1 checked above");
    let p_values = (0..dim)
        .map(|a| {
            let se = (sigma2 * inv[a][a]).sqrt();
            if se == 0.0 {
                // Perfect fit: the coefficient is either exactly determined
                // or exactly absent.
                return if beta[a] == 0.0 { 1.0 } else { 0.0 };
            }
            let t = (beta[a] / se).abs();
            2.0 * (1.0 - t_dist.cdf(t))
        })
        .collect();

    Ok(RegressionResult {
        selected: x.names.clone(),
        beta,
        p_values,
        r2,
        adj_r2,
        n_rows: n,
    })
}

/// Forward-entry / backward-removal stepwise selection on p-values, with a
/// final full refit on the surviving set. Deterministic: entry ties go to
/// the smaller p, then the smaller column index.
pub fn stepwise_select(x: &DesignMatrix, p_enter: f64, p_remove: f64) -> Result<RegressionResult> {
    if !(p_enter > 0.0 && p_enter < p_remove && p_remove < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "need 0 < p_enter < p_remove < 1, got {p_enter} and {p_remove}"
        )));
    }

    let mut selected: Vec<usize> = Vec::new();
    loop {
        let mut changed = false;

        // Forward: try each unselected column appended to the current set.
        let mut best: Option<(f64, usize)> = None;
        for j in 0..x.columns.len() {
            if selected.contains(&j) || x.n_rows() < selected.len() + 3 {
                continue;
            }
            let mut trial = selected.clone();
            trial.push(j);
            let Ok(fit) = ols_fit(&x.subset(&trial)) else {
                continue; // collinear with the current set: not a candidate
            };
            let p = *fit.p_values.last().expect("candidate coefficient present");
            let better = match best {
                None => true,
                Some((bp, bj)) => p < bp || (p == bp && j < bj),
            };
            if better {
                best = Some((p, j));
            }
        }
        if let Some((p, j)) = best {
            if p <= p_enter {
                selected.push(j);
                changed = true;
            }
        }

        // Backward: drop the worst in-model column while it exceeds p_remove.
        loop {
            if selected.is_empty() {
                break;
            }
            let fit = ols_fit(&x.subset(&selected))?;
            let worst = fit.p_values[1..]
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, &p)| (i, p))
                .expect("non-empty model");
            if worst.1 > p_remove {
                selected.remove(worst.0);
                changed = true;
            } else {
                break;
            }
        }

        if !changed {
            break;
        }
    }

    if selected.is_empty() {
        // Intercept-only report.
        let n = x.n_rows();
        let mean_y = x.response.iter().sum::<f64>() / n as f64;
        return Ok(RegressionResult {
            selected: vec![],
            beta: vec![mean_y],
            p_values: vec![],
            r2: 0.0,
            adj_r2: 0.0,
            n_rows: n,
        });
    }
    ols_fit(&x.subset(&selected))
}

/// Dense matrix inverse by Gauss-Jordan with partial pivoting; rejects
/// rank-deficient input.
fn invert(m: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let dim = m.len();
    let scale = m
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, &v| acc.max(v.abs()))
        .max(1e-300);
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() < 1e-12 * scale {
            return Err(Error::CollinearDesign(format!(
                "normal equations rank-deficient at column {col}"
            )));
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for j in 0..dim {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for row in 0..dim {
            if row == col {
                continue;
            }
            let f = a[row][col];
            if f == 0.0 {
                continue;
            }
            for j in 0..dim {
                a[row][j] -= f * a[col][j];
                inv[row][j] -= f * inv[col][j];
            }
        }
    }
    Ok(inv)
}
