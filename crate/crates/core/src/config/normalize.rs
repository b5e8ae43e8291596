//! Affine normal form `lambda' prod (x+alpha_i) prod (y+beta_j) prod (y-x+gamma_k) - 1` for N <= 3.

use serde::Serialize;

use super::{LineConfiguration, LineGroup, Parameter};
use crate::arith::ExactScalar;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormalizedShape {
    TwoGroups,
    ThreeGroups,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalizedForm {
    pub shape: NormalizedShape,
    /// Original group index for each normalized group (largest group first).
    pub group_order: Vec<usize>,
    pub alphas: Vec<ExactScalar>,
    pub betas: Vec<ExactScalar>,
    pub gammas: Vec<ExactScalar>,
    pub lambda: ExactScalar,
    /// New coordinates: `X' = m[0][0] x + m[0][1] y`, `Y' = m[1][0] x + m[1][1] y`.
    pub matrix: [[ExactScalar; 2]; 2],
    /// Determinant of the linear part of the coordinate change.
    pub change_det: ExactScalar,
    /// True when lambda and every offset are algebraic integers.
    pub integral: bool,
}

impl NormalizedForm {
    pub fn map_point(
        &self,
        x: &ExactScalar,
        y: &ExactScalar,
    ) -> Result<(ExactScalar, ExactScalar)> {
        let m = &self.matrix;
        let xn = m[0][0]
            .checked_mul(x)?
            .checked_add(&m[0][1].checked_mul(y)?)?;
        let yn = m[1][0]
            .checked_mul(x)?
            .checked_add(&m[1][1].checked_mul(y)?)?;
        Ok((xn, yn))
    }

    /// The normalized data as a configuration with groups `x`, `y` (and `y - x`).
    pub fn to_config(&self, field_d: Option<num_bigint::BigInt>) -> Result<LineConfiguration> {
        let one = ExactScalar::one;
        let zero = ExactScalar::zero;
        let mut groups = vec![
            LineGroup {
                a: one(),
                b: zero(),
                offsets: self.alphas.clone(),
            },
            LineGroup {
                a: zero(),
                b: one(),
                offsets: self.betas.clone(),
            },
        ];
        if self.shape == NormalizedShape::ThreeGroups {
            groups.push(LineGroup {
                a: -one(),
                b: one(),
                offsets: self.gammas.clone(),
            });
        }
        LineConfiguration::new(field_d, groups, Parameter::Lambda(self.lambda.clone()))
    }
}

impl LineConfiguration {
    pub fn normalize_n_le_3(&self) -> Result<NormalizedForm> {
        let n = self.n_groups();
        if !(2..=3).contains(&n) {
            return Err(Error::Unsupported(format!(
                "normal form needs 2 or 3 groups, got {n}"
            )));
        }
        self.ensure_valid()?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(self.group_size(i)));
        let g = |k: usize| &self.groups()[order[k]];
        let (g1, g2) = (g(0), g(1));
        let d12 = self.det(order[0], order[1]);
        let lambda = self.lambda();
        let form = if n == 2 {
            NormalizedForm {
                shape: NormalizedShape::TwoGroups,
                group_order: order.clone(),
                alphas: g1.offsets.clone(),
                betas: g2.offsets.clone(),
                gammas: vec![],
                lambda,
                matrix: [[g1.a.clone(), g1.b.clone()], [g2.a.clone(), g2.b.clone()]],
                change_det: d12,
                integral: false,
            }
        } else {
            // (a3, b3) = p (a1, b1) + q (a2, b2)
            let p = self.det(order[2], order[1]).checked_div(&d12)?;
            let q = self.det(order[0], order[2]).checked_div(&d12)?;
            let minus_p = -&p;
            let alphas = g1
                .offsets
                .iter()
                .map(|c| minus_p.checked_mul(c))
                .collect::<Result<Vec<_>>>()?;
            let betas = g2
                .offsets
                .iter()
                .map(|c| q.checked_mul(c))
                .collect::<Result<Vec<_>>>()?;
            let lam = lambda
                .checked_mul(&minus_p.inv()?.pow(g1.offsets.len() as i64)?)?
                .checked_mul(&q.inv()?.pow(g2.offsets.len() as i64)?)?;
            let matrix = [
                [minus_p.checked_mul(&g1.a)?, minus_p.checked_mul(&g1.b)?],
                [q.checked_mul(&g2.a)?, q.checked_mul(&g2.b)?],
            ];
            let change_det = d12.checked_mul(&minus_p)?.checked_mul(&q)?;
            NormalizedForm {
                shape: NormalizedShape::ThreeGroups,
                group_order: order.clone(),
                alphas,
                betas,
                gammas: g(2).offsets.clone(),
                lambda: lam,
                matrix,
                change_det,
                integral: false,
            }
        };
        let integral = form.lambda.is_algebraic_integer()
            && form
                .alphas
                .iter()
                .chain(&form.betas)
                .chain(&form.gammas)
                .all(|c| c.is_algebraic_integer());
        Ok(NormalizedForm { integral, ..form })
    }
}
