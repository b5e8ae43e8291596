//! Line configurations `lambda * prod_{i,j} (a_i x + b_i y + c_{i,j}) = 1` and their combinatorics.

mod normalize;
mod projection;
mod smooth;

use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::arith::linalg::det2;
use crate::arith::ExactScalar;
use crate::error::{Error, Result};

pub use normalize::{NormalizedForm, NormalizedShape};
pub use projection::{theta_candidates, ProjectionChoice};
pub use smooth::{SmoothnessReport, SmoothnessVerdict, DEFAULT_SMOOTHNESS_TOL};

/// One group of parallel lines `a x + b y + c_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineGroup {
    pub a: ExactScalar,
    pub b: ExactScalar,
    pub offsets: Vec<ExactScalar>,
}

/// The curve parameter, given either as `lambda` or as `t = 1/lambda`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Parameter {
    Lambda(ExactScalar),
    T(ExactScalar),
}

/// A configured line `L_{group, offset}`; indices are 0-based and display 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LineId {
    pub group: usize,
    pub offset: usize,
}

impl LineId {
    pub fn new(group: usize, offset: usize) -> Self {
        LineId { group, offset }
    }
}

impl fmt::Display for LineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{},{}", self.group + 1, self.offset + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineConfiguration {
    field_d: Option<BigInt>,
    groups: Vec<LineGroup>,
    param: Parameter,
}

/// Intersection `P_{i,j;k,l}` of `L_{i,j}` and `L_{k,l}` with `i < k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntersectionPoint {
    pub first: LineId,
    pub second: LineId,
    pub x: ExactScalar,
    pub y: ExactScalar,
}

impl fmt::Display for IntersectionPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "P{},{};{},{}",
            self.first.group + 1,
            self.first.offset + 1,
            self.second.group + 1,
            self.second.offset + 1
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<HypothesisCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenusForms {
    /// `sum_{i<k} N_i N_k - sum N_i + 1`
    pub pairwise: i64,
    /// `C(d-1, 2) - sum C(N_i, 2)`
    pub binomial: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    #[serde(rename = "D")]
    d: Option<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    field: Option<RawField>,
    groups: Vec<LineGroup>,
    lambda: Option<ExactScalar>,
    t: Option<ExactScalar>,
}

#[derive(Serialize)]
struct RawConfigOut<'a> {
    field: RawFieldOut,
    groups: &'a [LineGroup],
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<&'a ExactScalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<&'a ExactScalar>,
}

#[derive(Serialize)]
struct RawFieldOut {
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    d: Option<i64>,
}

fn binom2(n: i64) -> i64 {
    n * (n - 1) / 2
}

impl LineConfiguration {
    /// Builds a configuration. Structural problems (fewer than two groups, empty groups,
    /// scalars outside the declared field, zero parameter) are errors; geometric hypotheses
    /// are reported by [`LineConfiguration::validate`].
    pub fn new(field_d: Option<BigInt>, groups: Vec<LineGroup>, param: Parameter) -> Result<Self> {
        if groups.len() < 2 {
            return Err(Error::invalid("a configuration needs at least two groups"));
        }
        for (i, g) in groups.iter().enumerate() {
            if g.offsets.is_empty() {
                return Err(Error::invalid(format!("group {} has no offsets", i + 1)));
            }
        }
        if let Some(d) = &field_d {
            let probe = ExactScalar::sqrt_of(d.clone())?;
            if probe.discriminant() != Some(d) {
                return Err(Error::invalid(format!(
                    "field discriminant {d} must be squarefree and > 1"
                )));
            }
        }
        let cfg = LineConfiguration {
            field_d,
            groups,
            param,
        };
        for s in cfg.all_scalars() {
            if let Some(sd) = s.discriminant() {
                if cfg.field_d.as_ref() != Some(sd) {
                    return Err(Error::invalid(format!(
                        "scalar {s} lies outside the declared field"
                    )));
                }
            }
        }
        if cfg.param_scalar().is_zero() {
            return Err(Error::invalid("lambda and t must be nonzero"));
        }
        Ok(cfg)
    }

    /// Rational configuration from integer triples `(a, b, [c...])` and a parameter.
    pub fn from_ints(groups: &[(i64, i64, &[i64])], param: Parameter) -> Result<Self> {
        let groups = groups
            .iter()
            .map(|&(a, b, cs)| LineGroup {
                a: ExactScalar::from_int(a),
                b: ExactScalar::from_int(b),
                offsets: cs.iter().map(|&c| ExactScalar::from_int(c)).collect(),
            })
            .collect();
        Self::new(None, groups, param)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::parse(e.to_string()))?;
        let param = match (raw.lambda, raw.t) {
            (Some(l), None) => Parameter::Lambda(l),
            (None, Some(t)) => Parameter::T(t),
            _ => {
                return Err(Error::invalid(
                    "exactly one of \"lambda\" and \"t\" must be given",
                ))
            }
        };
        let d = raw.field.and_then(|f| f.d).map(BigInt::from);
        Self::new(d, raw.groups, param)
    }

    pub fn to_json(&self) -> String {
        let (lambda, t) = match &self.param {
            Parameter::Lambda(l) => (Some(l), None),
            Parameter::T(t) => (None, Some(t)),
        };
        let out = RawConfigOut {
            field: RawFieldOut {
                d: self.field_d.as_ref().and_then(|d| i64::try_from(d).ok()),
            },
            groups: &self.groups,
            lambda,
            t,
        };
        serde_json::to_string_pretty(&out).expect("serializable")
    }

    fn all_scalars(&self) -> impl Iterator<Item = &ExactScalar> {
        let p = match &self.param {
            Parameter::Lambda(l) | Parameter::T(l) => l,
        };
        self.groups
            .iter()
            .flat_map(|g| {
                std::iter::once(&g.a)
                    .chain(std::iter::once(&g.b))
                    .chain(g.offsets.iter())
            })
            .chain(std::iter::once(p))
    }

    fn param_scalar(&self) -> &ExactScalar {
        match &self.param {
            Parameter::Lambda(l) | Parameter::T(l) => l,
        }
    }

    pub fn field_d(&self) -> Option<&BigInt> {
        self.field_d.as_ref()
    }

    pub fn groups(&self) -> &[LineGroup] {
        &self.groups
    }

    pub fn parameter(&self) -> &Parameter {
        &self.param
    }

    /// Same lines, different parameter.
    pub fn with_parameter(&self, param: Parameter) -> Result<Self> {
        Self::new(self.field_d.clone(), self.groups.clone(), param)
    }

    pub fn with_t(&self, t: ExactScalar) -> Result<Self> {
        self.with_parameter(Parameter::T(t))
    }

    pub fn lambda(&self) -> ExactScalar {
        match &self.param {
            Parameter::Lambda(l) => l.clone(),
            Parameter::T(t) => t.inv().expect("t is nonzero"),
        }
    }

    pub fn t(&self) -> ExactScalar {
        match &self.param {
            Parameter::T(t) => t.clone(),
            Parameter::Lambda(l) => l.inv().expect("lambda is nonzero"),
        }
    }

    /// Number of groups `N`.
    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    /// Group sizes `N_i`.
    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.offsets.len()).collect()
    }

    pub fn group_size(&self, i: usize) -> usize {
        self.groups[i].offsets.len()
    }

    /// Total degree `d = sum N_i`.
    pub fn degree(&self) -> usize {
        self.sizes().iter().sum()
    }

    /// All configured lines in `(group, offset)` order.
    pub fn line_ids(&self) -> Vec<LineId> {
        self.groups
            .iter()
            .enumerate()
            .flat_map(|(i, g)| (0..g.offsets.len()).map(move |j| LineId::new(i, j)))
            .collect()
    }

    /// Coefficients `(a, b, c)` of a configured line.
    pub fn line(&self, id: LineId) -> (&ExactScalar, &ExactScalar, &ExactScalar) {
        let g = &self.groups[id.group];
        (&g.a, &g.b, &g.offsets[id.offset])
    }

    pub fn offset(&self, id: LineId) -> &ExactScalar {
        &self.groups[id.group].offsets[id.offset]
    }

    /// `det[i,k] = a_i b_k - a_k b_i`.
    pub fn det(&self, i: usize, k: usize) -> ExactScalar {
        let (gi, gk) = (&self.groups[i], &self.groups[k]);
        det2(&gi.a, &gi.b, &gk.a, &gk.b).expect("scalars share the configuration field")
    }

    pub fn check_line(&self, id: LineId) -> Result<()> {
        if id.group >= self.groups.len() || id.offset >= self.groups[id.group].offsets.len() {
            return Err(Error::invalid(format!("line index {id} out of range")));
        }
        Ok(())
    }

    /// Exact intersection of two lines from different groups.
    pub fn intersection(&self, p: LineId, q: LineId) -> Result<IntersectionPoint> {
        self.check_line(p)?;
        self.check_line(q)?;
        let (first, second) = if p.group < q.group { (p, q) } else { (q, p) };
        if first.group == second.group {
            return Err(Error::invalid("lines of the same group are parallel"));
        }
        let (ai, bi, ci) = self.line(first);
        let (ak, bk, ck) = self.line(second);
        let det = self.det(first.group, second.group);
        if det.is_zero() {
            return Err(Error::invalid(format!(
                "groups {} and {} are parallel",
                first.group + 1,
                second.group + 1
            )));
        }
        let x = ck
            .checked_mul(bi)?
            .checked_sub(&ci.checked_mul(bk)?)?
            .checked_div(&det)?;
        let y = ak
            .checked_mul(ci)?
            .checked_sub(&ai.checked_mul(ck)?)?
            .checked_div(&det)?;
        Ok(IntersectionPoint {
            first,
            second,
            x,
            y,
        })
    }

    /// Every `P_{i,j;k,l}` with `i < k`, in lexicographic index order.
    pub fn intersections(&self) -> Result<Vec<IntersectionPoint>> {
        let mut out = Vec::new();
        let ids = self.line_ids();
        for p in &ids {
            for q in &ids {
                if p.group < q.group {
                    out.push(self.intersection(*p, *q)?);
                }
            }
        }
        Ok(out)
    }

    /// Checks every hypothesis imposed on the configuration.
    pub fn validate(&self) -> ValidationReport {
        let mut checks = Vec::new();
        let mut push = |name: &str, passed: bool, detail: String| {
            checks.push(HypothesisCheck {
                name: name.to_string(),
                passed,
                detail,
            })
        };

        let bad_dirs: Vec<String> = self
            .groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.a.is_zero() && g.b.is_zero())
            .map(|(i, _)| (i + 1).to_string())
            .collect();
        push(
            "nonzero-directions",
            bad_dirs.is_empty(),
            format!("groups with (a,b)=(0,0): [{}]", bad_dirs.join(",")),
        );

        let mut dup_offsets = Vec::new();
        for (i, g) in self.groups.iter().enumerate() {
            for j in 0..g.offsets.len() {
                for k in j + 1..g.offsets.len() {
                    if g.offsets[j] == g.offsets[k] {
                        dup_offsets.push(format!("L{},{}=L{},{}", i + 1, j + 1, i + 1, k + 1));
                    }
                }
            }
        }
        push(
            "distinct-offsets",
            dup_offsets.is_empty(),
            format!("repeated lines: [{}]", dup_offsets.join(",")),
        );

        let mut parallel = Vec::new();
        for i in 0..self.groups.len() {
            for k in i + 1..self.groups.len() {
                if self.det(i, k).is_zero() {
                    parallel.push(format!("({},{})", i + 1, k + 1));
                }
            }
        }
        let nonparallel = parallel.is_empty() && bad_dirs.is_empty();
        push(
            "pairwise-non-parallel",
            nonparallel,
            format!("parallel group pairs: [{}]", parallel.join(",")),
        );

        // Distinct groups with identical directions and offsets would also be caught above.
        if nonparallel {
            let pts = self.intersections().expect("non-parallel groups intersect");
            let mut concurrent = Vec::new();
            for a in 0..pts.len() {
                for b in a + 1..pts.len() {
                    if pts[a].x == pts[b].x && pts[a].y == pts[b].y {
                        concurrent.push(format!(
                            "{}={} at ({}, {})",
                            pts[a], pts[b], pts[a].x, pts[a].y
                        ));
                    }
                }
            }
            push(
                "no-three-concurrent",
                concurrent.is_empty(),
                if concurrent.is_empty() {
                    format!("{} distinct intersection points", pts.len())
                } else {
                    concurrent.join("; ")
                },
            );
        } else {
            push(
                "no-three-concurrent",
                false,
                "not checked: some groups are parallel".to_string(),
            );
        }

        push(
            "nonzero-parameter",
            !self.param_scalar().is_zero(),
            format!("lambda = {}", self.lambda()),
        );
        ValidationReport { checks }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let rep = self.validate();
        if rep.passed() {
            Ok(())
        } else {
            let names: Vec<_> = rep
                .failures()
                .iter()
                .map(|c| format!("{}: {}", c.name, c.detail))
                .collect();
            Err(Error::invalid(format!(
                "configuration fails hypotheses: {}",
                names.join("; ")
            )))
        }
    }

    /// Both closed forms of the genus.
    pub fn genus_forms(&self) -> GenusForms {
        genus_forms_for(&self.sizes())
    }

    /// Genus of the smooth projective model.
    pub fn genus(&self) -> Result<u64> {
        let f = self.genus_forms();
        if f.pairwise != f.binomial {
            return Err(Error::numerical(format!(
                "genus forms disagree: {} vs {}",
                f.pairwise, f.binomial
            )));
        }
        u64::try_from(f.pairwise)
            .map_err(|_| Error::invalid(format!("negative genus {}", f.pairwise)))
    }

    /// The set S: all `P_{i,j;k,l}` except those with `(i,j) = (1,1)` or `(i,k,l) = (1,2,1)`.
    pub fn special_set_s(&self) -> Result<Vec<IntersectionPoint>> {
        Ok(self
            .intersections()?
            .into_iter()
            .filter(in_special_set)
            .collect())
    }
}

/// Index-level membership test for the set S.
pub fn in_special_set(p: &IntersectionPoint) -> bool {
    let on_first_line = p.first == LineId::new(0, 0);
    let excluded_pair = p.first.group == 0 && p.second.group == 1 && p.second.offset == 0;
    !on_first_line && !excluded_pair
}

/// Both genus closed forms for group sizes `N_i`.
pub fn genus_forms_for(sizes: &[usize]) -> GenusForms {
    let n: Vec<i64> = sizes.iter().map(|&v| v as i64).collect();
    let d: i64 = n.iter().sum();
    let mut pair = 0;
    for i in 0..n.len() {
        for k in i + 1..n.len() {
            pair += n[i] * n[k];
        }
    }
    let pairwise = pair - d + 1;
    let binomial = binom2(d - 1) - n.iter().map(|&v| binom2(v)).sum::<i64>();
    GenusForms { pairwise, binomial }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn pt(p: &IntersectionPoint) -> (ExactScalar, ExactScalar) {
        (p.x.clone(), p.y.clone())
    }

    #[test]
    fn cfg_a_validates_with_three_points() {
        let c = cfg_a();
        assert!(c.validate().passed());
        let pts: Vec<_> = c.intersections().unwrap().iter().map(pt).collect();
        let z = ExactScalar::zero;
        let i = ExactScalar::from_int;
        assert_eq!(pts, vec![(z(), z()), (z(), i(-1)), (i(1), z())]);
    }

    #[test]
    fn failing_hypotheses() {
        let c = LineConfiguration::from_ints(
            &[(1, 0, &[0]), (0, 1, &[0]), (-1, 1, &[0])],
            t_param(1, 2),
        )
        .unwrap();
        let rep = c.validate();
        assert!(!rep.passed());
        assert_eq!(rep.failures()[0].name, "no-three-concurrent");
        let c =
            LineConfiguration::from_ints(&[(1, 0, &[0, 0]), (0, 1, &[0])], t_param(1, 2)).unwrap();
        assert_eq!(c.validate().failures()[0].name, "distinct-offsets");
        let c = LineConfiguration::from_ints(&[(1, 0, &[0]), (2, 0, &[1])], t_param(1, 2)).unwrap();
        assert!(c
            .validate()
            .failures()
            .iter()
            .any(|f| f.name == "pairwise-non-parallel"));
    }

    #[test]
    fn genus_and_special_set() {
        for (c, g) in [(cfg_a(), 1), (cfg_b(), 1), (cfg_c(), 4)] {
            assert_eq!(c.genus().unwrap(), g);
            assert_eq!(c.special_set_s().unwrap().len() as u64, g);
        }
        let s = cfg_a().special_set_s().unwrap();
        assert_eq!(pt(&s[0]), (ExactScalar::from_int(1), ExactScalar::zero()));
        let s = cfg_b().special_set_s().unwrap();
        assert_eq!(
            pt(&s[0]),
            (ExactScalar::from_int(-1), ExactScalar::from_int(-1))
        );
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"field": {"D": 5}, "groups": [{"a": 1, "b": 0, "offsets": ["0", "1/2+1/2*sqrt(5)"]},
                      {"a": "0", "b": "1", "offsets": ["0"]}], "t": 1e-4}"#;
        let c = LineConfiguration::from_json(text).unwrap();
        assert_eq!(c.t(), ExactScalar::from_ratio(1, 10000));
        let again = LineConfiguration::from_json(&c.to_json()).unwrap();
        assert_eq!(c, again);
        assert!(LineConfiguration::from_json(
            r#"{"groups": [{"a":1,"b":0,"offsets":[0]},{"a":0,"b":1,"offsets":[0]}]}"#
        )
        .is_err());
        let wrong_field = r#"{"groups": [{"a":1,"b":0,"offsets":["sqrt(2)"]},{"a":0,"b":1,"offsets":[0]}], "lambda": 1}"#;
        assert!(LineConfiguration::from_json(wrong_field).is_err());
    }
}
