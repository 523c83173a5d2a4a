use nalgebra::DMatrix;

use super::entropy::{differential_entropy, EntropyMethod};
use super::stats::{pearson, spearman};
use crate::error::{CoreError, Result};

/// Non-overlapping `window x window` block sums.
pub fn sum_pool(m: &DMatrix<f64>, window: usize) -> Result<DMatrix<f64>> {
    if window == 0 || m.nrows() % window != 0 || m.ncols() % window != 0 {
        return Err(CoreError::InvalidArgument(format!(
            "window {window} does not divide {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let (r, c) = (m.nrows() / window, m.ncols() / window);
    Ok(DMatrix::from_fn(r, c, |i, j| m.view((i * window, j * window), (window, window)).sum()))
}

/// Rank correlation between `surrogate` and every non-overlapping window
/// of `pooled` with the same shape. `None` marks zero-variance windows.
pub fn spearman_matrix(surrogate: &DMatrix<f64>, pooled: &DMatrix<f64>) -> Result<Vec<Vec<Option<f64>>>> {
    let (wr, wc) = surrogate.shape();
    if wr == 0 || wc == 0 || pooled.nrows() % wr != 0 || pooled.ncols() % wc != 0 {
        return Err(CoreError::DimensionMismatch { expected: wr, got: pooled.nrows() });
    }
    let s: Vec<f64> = surrogate.iter().copied().collect();
    Ok((0..pooled.nrows() / wr)
        .map(|i| {
            (0..pooled.ncols() / wc)
                .map(|j| {
                    let w: Vec<f64> = pooled.view((i * wr, j * wc), (wr, wc)).iter().copied().collect();
                    spearman(&w, &s)
                })
                .collect()
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyCurve {
    pub steps: Vec<usize>,
    pub values: Vec<f64>,
    pub degenerate: Vec<bool>,
}

impl EntropyCurve {
    pub fn any_degenerate(&self) -> bool {
        self.degenerate.iter().any(|&d| d)
    }
}

/// Entropy of the values observed at each layer (layers numbered from 1).
pub fn entropy_curve(per_layer: &[Vec<f64>], method: EntropyMethod) -> Result<EntropyCurve> {
    let mut curve = EntropyCurve { steps: vec![], values: vec![], degenerate: vec![] };
    for (l, v) in per_layer.iter().enumerate() {
        let e = differential_entropy(v, method)?;
        curve.steps.push(l + 1);
        curve.values.push(e.value);
        curve.degenerate.push(e.degenerate);
    }
    Ok(curve)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Correspondence {
    pub surrogate: EntropyCurve,
    pub ptm: EntropyCurve,
    /// `None` when a curve is constant.
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
}

/// Correlates the entropy curve of surrogate values with that of the
/// cumulative-noise PTM entries, layer by layer.
pub fn entropy_correspondence(surrogate: &[Vec<f64>], ptm: &[Vec<f64>]) -> Result<Correspondence> {
    if surrogate.len() != ptm.len() {
        return Err(CoreError::DimensionMismatch { expected: ptm.len(), got: surrogate.len() });
    }
    if ptm.len() < 3 {
        return Err(CoreError::InvalidArgument("entropy correspondence needs at least 3 layers".into()));
    }
    let s = entropy_curve(surrogate, EntropyMethod::Auto)?;
    let p = entropy_curve(ptm, EntropyMethod::Auto)?;
    Ok(Correspondence {
        pearson: pearson(&s.values, &p.values),
        spearman: spearman(&s.values, &p.values),
        surrogate: s,
        ptm: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pooling() {
        let ones = DMatrix::from_element(4, 4, 1.0);
        assert_eq!(sum_pool(&ones, 2).unwrap(), DMatrix::from_element(2, 2, 4.0));
        let id = DMatrix::<f64>::identity(64, 64);
        let p = sum_pool(&id, 2).unwrap();
        assert_eq!(p.shape(), (32, 32));
        assert_eq!(p, DMatrix::identity(32, 32) * 2.0);
        assert!(sum_pool(&ones, 3).is_err());
    }

    #[test]
    fn monotone_windows() {
        let s = DMatrix::from_fn(2, 2, |i, j| (i * 2 + j) as f64);
        let pooled = DMatrix::from_fn(2, 4, |i, j| {
            let v = (i * 2 + j % 2) as f64;
            if j < 2 {
                v.exp()
            } else {
                -v
            }
        });
        let m = spearman_matrix(&s, &pooled).unwrap();
        assert!((m[0][0].unwrap() - 1.0).abs() < 1e-15);
        assert!((m[0][1].unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn identical_and_reversed_curves() {
        let layers: Vec<Vec<f64>> = (1..=4).map(|l| (0..50).map(|i| (i * l) as f64 * 0.01).collect()).collect();
        let c = entropy_correspondence(&layers, &layers).unwrap();
        assert!((c.pearson.unwrap() - 1.0).abs() < 1e-12);
        assert!((c.spearman.unwrap() - 1.0).abs() < 1e-12);
        let rev: Vec<Vec<f64>> = layers.iter().rev().cloned().collect();
        let c = entropy_correspondence(&layers, &rev).unwrap();
        assert!((c.spearman.unwrap() + 1.0).abs() < 1e-12);
    }
}
