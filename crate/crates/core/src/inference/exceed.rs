use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// ℓ-exceedances on the standard Pareto scale for ℓ(f) = max_j f_j/u_j,
/// together with the total number of complete observations they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExceedanceSample {
    x_star: Matrix<f64>,
    n_total: usize,
    u: Vec<f64>,
    exceed_sets: Vec<Vec<usize>>,
}

impl ExceedanceSample {
    /// Wraps rows that are already exceedances. Every row needs
    /// max_j x_j/u_j ≥ 1 and finite nonnegative entries. Zeros occur in
    /// simulated ℓ-Pareto vectors, whose law puts mass on the faces of the
    /// orthant; standardized data are always at least 1.
    pub fn new(x_star: Matrix<f64>, n_total: usize, u: Vec<f64>) -> Result<Self> {
        check_thresholds(&u, x_star.cols())?;
        if x_star.rows() == 0 {
            return Err(Error::EmptySample);
        }
        if x_star.rows() > n_total {
            return Err(Error::InvalidParameter(format!("{} exceedances out of only {n_total} observations", x_star.rows())));
        }
        let mut exceed_sets = Vec::with_capacity(x_star.rows());
        for (k, row) in x_star.to_rows().iter().enumerate() {
            if let Some(v) = row.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
                return Err(Error::Domain(format!("row {k} has entry {v}; exceedances must be finite and nonnegative")));
            }
            let set = exceed_set(row, &u);
            if set.is_empty() {
                return Err(Error::Domain(format!("row {k} does not exceed the threshold")));
            }
            exceed_sets.push(set);
        }
        Ok(Self { x_star, n_total, u, exceed_sets })
    }

    /// A sample without exceedances out of `n_total` observations.
    pub fn empty(n_total: usize, u: Vec<f64>) -> Self {
        Self { x_star: Matrix::zeros(0, u.len()), n_total, u, exceed_sets: Vec::new() }
    }

    pub fn x_star(&self) -> &Matrix<f64> {
        &self.x_star
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.u
    }

    /// Components at or above their threshold, per row.
    pub fn exceed_sets(&self) -> &[Vec<usize>] {
        &self.exceed_sets
    }

    /// Number of exceedances N_u.
    pub fn len(&self) -> usize {
        self.x_star.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.x_star.cols()
    }

    /// Exceedances of the sub-vector at `sites`: rows exceeding in at least
    /// one of the selected components, with the same total count. Returns
    /// `None` when no row qualifies.
    pub fn marginalize(&self, sites: &[usize]) -> Option<Self> {
        let u: Vec<f64> = sites.iter().map(|&j| self.u[j]).collect();
        let mut rows = Vec::new();
        let mut sets = Vec::new();
        for k in 0..self.len() {
            let row: Vec<f64> = sites.iter().map(|&j| self.x_star[(k, j)]).collect();
            let set = exceed_set(&row, &u);
            if !set.is_empty() {
                rows.push(row);
                sets.push(set);
            }
        }
        if rows.is_empty() {
            return None;
        }
        let x_star = Matrix::from_fn(rows.len(), sites.len(), |i, j| rows[i][j]);
        Some(Self { x_star, n_total: self.n_total, u, exceed_sets: sets })
    }
}

fn exceed_set(row: &[f64], u: &[f64]) -> Vec<usize> {
    (0..row.len()).filter(|&j| row[j] >= u[j]).collect()
}

fn check_thresholds(u: &[f64], dim: usize) -> Result<()> {
    if u.len() != dim {
        return Err(Error::DimensionMismatch(format!("{} thresholds for {dim} sites", u.len())));
    }
    if let Some(v) = u.iter().find(|v| !(**v >= 1.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("standard-scale thresholds must be at least 1, got {v}")));
    }
    Ok(())
}

/// Keeps the rows of an n×D standard-scale matrix with max_j x_j/u_j ≥ 1.
/// Rows with a missing (NaN) entry are dropped before anything else and do
/// not count towards the total.
pub fn extract_exceedances(x_star: &Matrix<f64>, u: &[f64]) -> Result<ExceedanceSample> {
    check_thresholds(u, x_star.cols())?;
    let complete: Vec<&[f64]> = (0..x_star.rows()).map(|i| x_star.row(i)).filter(|r| r.iter().all(|v| !v.is_nan())).collect();
    let dropped = x_star.rows() - complete.len();
    if dropped > 0 {
        log::info!("dropped {dropped} rows with missing values");
    }
    let kept: Vec<&[f64]> = complete.iter().copied().filter(|r| r.iter().zip(u).any(|(x, t)| x >= t)).collect();
    if kept.is_empty() {
        return Err(Error::EmptySample);
    }
    let m = Matrix::from_fn(kept.len(), u.len(), |i, j| kept[i][j]);
    ExceedanceSample::new(m, complete.len(), u.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row_exceeding_first_component() {
        let x = Matrix::from_rows(&[vec![25.0, 3.0]]).unwrap();
        let s = extract_exceedances(&x, &[20.0, 20.0]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.exceed_sets()[0], vec![0]);
    }

    #[test]
    fn unit_thresholds_keep_everything() {
        let x = Matrix::from_rows(&[vec![1.0, 1.5], vec![2.0, 1.0], vec![1.2, 1.1]]).unwrap();
        let s = extract_exceedances(&x, &[1.0, 1.0]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.n_total(), 3);
    }

    #[test]
    fn missing_rows_are_dropped_from_the_total() {
        let x = Matrix::from_rows(&[vec![30.0, f64::NAN], vec![2.0, 1.0], vec![1.2, 40.0]]).unwrap();
        let s = extract_exceedances(&x, &[20.0, 20.0]).unwrap();
        assert_eq!((s.len(), s.n_total()), (1, 2));
    }

    #[test]
    fn empty_and_invalid() {
        let x = Matrix::from_rows(&[vec![2.0, 1.0]]).unwrap();
        assert_eq!(extract_exceedances(&x, &[20.0, 20.0]), Err(Error::EmptySample));
        assert!(extract_exceedances(&x, &[0.5, 20.0]).is_err());
    }

    #[test]
    fn marginal_pair() {
        let x = Matrix::from_rows(&[vec![25.0, 3.0, 2.0], vec![1.0, 2.0, 30.0]]).unwrap();
        let s = extract_exceedances(&x, &[20.0, 20.0, 20.0]).unwrap();
        let p = s.marginalize(&[0, 1]).unwrap();
        assert_eq!((p.len(), p.n_total()), (1, 2));
        assert!(s.marginalize(&[1]).is_none());
    }
}
