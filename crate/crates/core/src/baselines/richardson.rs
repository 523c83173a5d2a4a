use num_traits::Num;

use crate::error::{CoreError, Result};

/// Richardson extrapolation weights: `Σ γ_i f(x_i)` cancels the first
/// `len - 1` moments of a polynomial noise dependence.
#[derive(Clone, Debug, PartialEq)]
pub struct RichardsonPlan<T> {
    pub scales: Vec<T>,
    pub coefficients: Vec<T>,
}

/// `γ_i = Π_{j != i} x_j / (x_j - x_i)`.
///
/// Generic over any number type, so exact rationals work as well as floats.
pub fn richardson_coefficients<T: Num + Clone + PartialOrd>(scales: &[T]) -> Result<RichardsonPlan<T>> {
    if scales.is_empty() {
        return Err(CoreError::InvalidArgument("no extrapolation scales".into()));
    }
    if scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CoreError::InvalidArgument("scales must be strictly increasing".into()));
    }
    let coefficients = (0..scales.len())
        .map(|i| {
            scales.iter().enumerate().filter(|&(j, _)| j != i).fold(T::one(), |acc, (_, xj)| {
                acc * (xj.clone() / (xj.clone() - scales[i].clone()))
            })
        })
        .collect();
    Ok(RichardsonPlan { scales: scales.to_vec(), coefficients })
}

impl<T: Num + Clone> RichardsonPlan<T> {
    /// `Σ γ_i x_i^k`; 1 for `k = 0`, 0 for `k = 1..len-1`.
    pub fn moment(&self, k: u32) -> T {
        self.scales.iter().zip(&self.coefficients).fold(T::zero(), |acc, (x, g)| {
            let mut p = T::one();
            for _ in 0..k {
                p = p * x.clone();
            }
            acc + g.clone() * p
        })
    }

    pub fn extrapolate(&self, values: &[T]) -> T {
        self.coefficients.iter().zip(values).fold(T::zero(), |acc, (g, v)| acc + g.clone() * v.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn two_and_three_point() {
        let p = richardson_coefficients(&[1.0, 3.0]).unwrap();
        assert_eq!(p.coefficients, vec![1.5, -0.5]);
        let r = |x| Ratio::from_integer(x as i64);
        let p = richardson_coefficients(&[r(1), r(2), r(3)]).unwrap();
        assert_eq!(p.coefficients, vec![r(3), r(-3), r(1)]);
        assert_eq!(p.moment(0), r(1));
        assert_eq!(p.moment(1), r(0));
        assert_eq!(p.moment(2), r(0));
        assert_eq!(richardson_coefficients(&[1.0]).unwrap().coefficients, vec![1.0]);
    }

    #[test]
    fn rejects_duplicates() {
        assert!(richardson_coefficients(&[1.0, 1.0]).is_err());
        assert!(richardson_coefficients::<f64>(&[]).is_err());
    }
}
