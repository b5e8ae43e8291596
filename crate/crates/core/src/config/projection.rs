//! Choice of the projection coordinate `u = x + theta*y`.

use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;

use super::LineConfiguration;
use crate::arith::{ExactScalar, Rational};
use crate::error::{Error, Result};

/// A shear `theta` such that every line is a graph over `u = x + theta*y`
/// and all intersection points have distinct `u`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProjectionChoice {
    pub theta: ExactScalar,
    /// Position of `theta` in the fixed enumeration.
    pub index: usize,
}

/// Fixed enumeration `0, 1, -1, 2, -2, 1/2, -1/2, 3, -3, 1/3, -1/3, 2/3, -2/3, 3/2, -3/2, ...`
/// (by height `max(|p|, q)`; within a height: `±h`, then `±n/h, ±h/n` for `1 <= n < h` coprime to `h`).
pub fn theta_candidates() -> impl Iterator<Item = Rational> {
    let zero = std::iter::once(Rational::from_integer(BigInt::from(0)));
    let rest = (1u64..).flat_map(|h| {
        let mut v = vec![
            Rational::from_integer(h.into()),
            -Rational::from_integer(h.into()),
        ];
        if h > 1 {
            for n in 1..h {
                if n.gcd(&h) == 1 {
                    let a = Rational::new(n.into(), h.into());
                    v.extend([a.clone(), -a]);
                    if n > 1 {
                        let b = Rational::new(h.into(), n.into());
                        v.extend([b.clone(), -b]);
                    }
                }
            }
        }
        v.into_iter()
    });
    zero.chain(rest)
}

/// How many candidates of the enumeration are examined before giving up.
const MAX_CANDIDATES: usize = 100_000;

impl LineConfiguration {
    /// Coefficient of `y` of group `i` in `(u, y)` coordinates: `b_i - theta*a_i`.
    pub fn sheared_q(&self, i: usize, theta: &ExactScalar) -> ExactScalar {
        let g = &self.groups()[i];
        &g.b - theta * &g.a
    }

    /// Checks both projection invariants exactly.
    pub fn projection_is_valid(&self, theta: &ExactScalar) -> Result<bool> {
        for i in 0..self.n_groups() {
            if self.sheared_q(i, theta).is_zero() {
                return Ok(false);
            }
        }
        let us: Vec<ExactScalar> = self
            .intersections()?
            .iter()
            .map(|p| p.x.checked_add(&theta.checked_mul(&p.y)?))
            .collect::<Result<_>>()?;
        for a in 0..us.len() {
            for b in a + 1..us.len() {
                if us[a] == us[b] {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// First valid shear in the fixed enumeration after skipping `seed` valid ones.
    pub fn choose_projection(&self, seed: u64) -> Result<ProjectionChoice> {
        self.ensure_valid()?;
        let mut skip = seed;
        for (index, th) in theta_candidates().take(MAX_CANDIDATES).enumerate() {
            let theta = ExactScalar::from_rational(th);
            if self.projection_is_valid(&theta)? {
                if skip == 0 {
                    return Ok(ProjectionChoice { theta, index });
                }
                skip -= 1;
            }
        }
        Err(Error::numerical(
            "no valid projection found in the candidate enumeration",
        ))
    }
}
