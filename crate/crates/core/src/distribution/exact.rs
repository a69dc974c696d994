//! Rational arithmetic for coefficient recovery.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::graph::{Graph, NodeId};

pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact `det(L^[root])` of `g` after scaling the weight of every edge at
/// `node` by `factor^omega(e)`, for each `(node, factor)` pair. Degree
/// weights on scaled edges must be nonnegative integers.
pub fn scaled_determinant(g: &Graph, root: NodeId, scales: &[(NodeId, BigRational)]) -> BigRational {
    let n = g.n_nodes();
    let row = |x: NodeId| (x != root).then(|| if x < root { x } else { x - 1 });
    let mut lap = vec![vec![BigRational::zero(); n - 1]; n - 1];
    for e in g.edges() {
        let mut w = rational(e.w);
        for (node, factor) in scales {
            if e.touches(*node) {
                w *= num_traits::pow(factor.clone(), e.omega as usize);
            }
        }
        let (ru, rv) = (row(e.u), row(e.v));
        if g.is_directed() {
            // u -> v adds w at (u, u) and -w at (v, u).
            if let Some(i) = ru {
                lap[i][i] += &w;
                if let Some(j) = rv {
                    lap[j][i] -= &w;
                }
            }
        } else {
            if let Some(i) = ru {
                lap[i][i] += &w;
            }
            if let Some(j) = rv {
                lap[j][j] += &w;
            }
            if let (Some(i), Some(j)) = (ru, rv) {
                lap[i][j] -= &w;
                lap[j][i] -= &w;
            }
        }
    }
    determinant(lap)
}

/// Determinant by Bareiss elimination after clearing denominators.
pub fn determinant(m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    if n == 0 {
        return BigRational::one();
    }
    let denom = m
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut a: Vec<Vec<BigInt>> = m
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|x| x.numer() * (&denom / x.denom()))
                .collect()
        })
        .collect();

    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigRational::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = t / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = sign * a[n - 1][n - 1].clone();
    BigRational::new(det, num_traits::pow(denom, n))
}

/// Monomial coefficients of the polynomial through `(xs[i], ys[i])`, via
/// Newton divided differences.
pub fn interpolate(xs: &[BigRational], ys: &[BigRational]) -> Vec<BigRational> {
    let n = xs.len();
    let mut dd = ys.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - level]);
        }
    }
    // Horner on the Newton form: p = dd[n-1]; p = p * (x - xs[i]) + dd[i].
    let mut coeffs = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        // coeffs *= (x - xs[i])
        for k in (1..n).rev() {
            let shifted = &coeffs[k - 1] - &coeffs[k] * &xs[i];
            coeffs[k] = shifted;
        }
        coeffs[0] = -&coeffs[0] * &xs[i];
        coeffs[0] += &dd[i];
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: i64) -> BigRational {
        BigRational::from_integer(x.into())
    }

    #[test]
    fn bareiss_matches_hand_determinants() {
        assert_eq!(determinant(vec![vec![r(2), r(-1)], vec![r(-1), r(2)]]), r(3));
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(
            determinant(vec![vec![half.clone(), r(1)], vec![r(1), half]]),
            BigRational::new((-3).into(), 4.into())
        );
        // Needs a row swap.
        assert_eq!(
            determinant(vec![
                vec![r(0), r(1), r(2)],
                vec![r(3), r(4), r(5)],
                vec![r(6), r(7), r(9)]
            ]),
            r(-3)
        );
    }

    #[test]
    fn interpolation_recovers_coefficients() {
        // 3 - x + 2 x^3
        let p = |x: &BigRational| r(3) - x + r(2) * x * x * x;
        let xs: Vec<BigRational> = (1..=4).map(r).collect();
        let ys: Vec<BigRational> = xs.iter().map(p).collect();
        assert_eq!(interpolate(&xs, &ys), vec![r(3), r(-1), r(0), r(2)]);
    }

    #[test]
    fn scaled_triangle_determinant() {
        let g = Graph::new(3, false, [(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0), (0, 2, 1.0, 1.0)]).unwrap();
        assert_eq!(scaled_determinant(&g, 2, &[]), r(3));
        assert_eq!(scaled_determinant(&g, 1, &[(0, r(2))]), r(8));
    }
}
