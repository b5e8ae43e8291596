//! The seven families of relations among R and T elements, checked symbolically.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::constants::{reduce_constant_part, ConstantReduction, TateVerdict};
use super::elements::{r_element_raw, r_label, t_element, t_label};
use super::{expand_bilinear, K2Symbol};
use crate::arith::ExactScalar;
use crate::config::LineConfiguration;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RelationId {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
}

impl RelationId {
    pub const ALL: [RelationId; 7] = [
        RelationId::I,
        RelationId::II,
        RelationId::III,
        RelationId::IV,
        RelationId::V,
        RelationId::VI,
        RelationId::VII,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        let t = s
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .to_ascii_lowercase();
        Ok(match t.as_str() {
            "i" | "1" => RelationId::I,
            "ii" | "2" => RelationId::II,
            "iii" | "3" => RelationId::III,
            "iv" | "4" => RelationId::IV,
            "v" | "5" => RelationId::V,
            "vi" | "6" => RelationId::VI,
            "vii" | "7" => RelationId::VII,
            _ => return Err(Error::parse(format!("unknown relation '{s}'"))),
        })
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RelationId::I => "i",
            RelationId::II => "ii",
            RelationId::III => "iii",
            RelationId::IV => "iv",
            RelationId::V => "v",
            RelationId::VI => "vi",
            RelationId::VII => "vii",
        };
        write!(f, "({s})")
    }
}

/// An R or T element with letters in place of indices: `R(i:j,k;l:m,n)` or `T(i,j;k,l;m,n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ElementSpec {
    R([char; 6]),
    T([char; 6]),
}

impl ElementSpec {
    fn parse(s: &str) -> Self {
        let letters: Vec<char> = s[1..].chars().filter(|c| c.is_ascii_lowercase()).collect();
        let arr: [char; 6] = letters.try_into().expect("six letters");
        match s.as_bytes()[0] {
            b'R' => ElementSpec::R(arr),
            b'T' => ElementSpec::T(arr),
            _ => unreachable!("element spec must start with R or T"),
        }
    }

    fn indices(&self, asg: &BTreeMap<char, usize>) -> [usize; 6] {
        let l = match self {
            ElementSpec::R(l) | ElementSpec::T(l) => l,
        };
        l.map(|c| asg[&c])
    }

    /// Side conditions on the group letters only.
    fn is_admissible(&self, asg: &BTreeMap<char, usize>) -> bool {
        match self {
            ElementSpec::R(l) => asg[&l[0]] != asg[&l[3]],
            ElementSpec::T(l) => {
                let (i, k, m) = (asg[&l[0]], asg[&l[2]], asg[&l[4]]);
                i != k && i != m && k != m
            }
        }
    }

    fn build(&self, cfg: &LineConfiguration, asg: &BTreeMap<char, usize>) -> Result<K2Symbol> {
        let [a, b, c, d, e, f] = self.indices(asg);
        match self {
            ElementSpec::R(_) => r_element_raw(cfg, a, b, c, d, e, f),
            ElementSpec::T(_) => t_element(cfg, a, b, c, d, e, f),
        }
    }

    fn label(&self, asg: &BTreeMap<char, usize>) -> String {
        let [a, b, c, d, e, f] = self.indices(asg);
        match self {
            ElementSpec::R(_) => r_label(a, b, c, d, e, f),
            ElementSpec::T(_) => t_label(a, b, c, d, e, f),
        }
    }
}

/// `lhs = sum coeff * rhs` with letter roles: group letters and offset letters tied to a group letter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationTemplate {
    pub id: RelationId,
    /// Distinguishes the two equalities of (i) and (ii).
    pub part: usize,
    pub lhs: ElementSpec,
    pub rhs: Vec<(i64, ElementSpec)>,
    pub group_letters: Vec<char>,
    pub offset_letters: Vec<(char, char)>,
}

fn template(
    id: RelationId,
    part: usize,
    lhs: &str,
    rhs: &[(i64, &str)],
    groups: &str,
    offsets: &[(char, char)],
) -> RelationTemplate {
    RelationTemplate {
        id,
        part,
        lhs: ElementSpec::parse(lhs),
        rhs: rhs
            .iter()
            .map(|(k, s)| (*k, ElementSpec::parse(s)))
            .collect(),
        group_letters: groups.chars().collect(),
        offset_letters: offsets.to_vec(),
    }
}

pub fn relation_templates(id: RelationId) -> Vec<RelationTemplate> {
    use RelationId::*;
    let t_off = [('j', 'i'), ('l', 'k'), ('n', 'm')];
    let r_off = [('j', 'i'), ('k', 'i'), ('m', 'l'), ('n', 'l')];
    match id {
        I => vec![
            template(
                I,
                1,
                "T(i,j;k,l;m,n)",
                &[(-1, "T(k,l;i,j;m,n)")],
                "ikm",
                &t_off,
            ),
            template(
                I,
                2,
                "T(i,j;k,l;m,n)",
                &[(-1, "T(i,j;m,n;k,l)")],
                "ikm",
                &t_off,
            ),
        ],
        II => vec![
            template(
                II,
                1,
                "R(i:j,k;l:m,n)",
                &[(-1, "R(i:k,j;l:m,n)")],
                "il",
                &r_off,
            ),
            template(
                II,
                2,
                "R(i:j,k;l:m,n)",
                &[(-1, "R(l:m,n;i:j,k)")],
                "il",
                &r_off,
            ),
        ],
        III => vec![template(
            III,
            1,
            "R(i:j,k;l:m,n)",
            &[
                (1, "R(i:p,j;l:q,m)"),
                (-1, "R(i:p,k;l:q,m)"),
                (-1, "R(i:p,j;l:q,n)"),
                (1, "R(i:p,k;l:q,n)"),
            ],
            "il",
            &[
                ('j', 'i'),
                ('k', 'i'),
                ('p', 'i'),
                ('m', 'l'),
                ('n', 'l'),
                ('q', 'l'),
            ],
        )],
        IV => vec![template(
            IV,
            1,
            "R(i:j,k;l:m,n)",
            &[
                (1, "T(p,q;i,j;l,m)"),
                (-1, "T(p,q;i,k;l,m)"),
                (-1, "T(p,q;i,j;l,n)"),
                (1, "T(p,q;i,k;l,n)"),
            ],
            "ilp",
            &[('j', 'i'), ('k', 'i'), ('m', 'l'), ('n', 'l'), ('q', 'p')],
        )],
        V => vec![template(
            V,
            1,
            "T(i,j;k,l;m,n)",
            &[
                (1, "T(i,p;k,l;m,n)"),
                (-1, "T(i,p;k,q;m,n)"),
                (1, "T(i,j;k,q;m,n)"),
                (1, "R(i:p,j;k:q,l)"),
            ],
            "ikm",
            &[('j', 'i'), ('p', 'i'), ('l', 'k'), ('q', 'k'), ('n', 'm')],
        )],
        VI => vec![template(
            VI,
            1,
            "T(i,j;k,l;m,n)",
            &[
                (1, "T(i,p;k,l;m,n)"),
                (-1, "T(i,p;q,r;m,n)"),
                (1, "T(i,j;q,r;m,n)"),
                (1, "T(i,p;q,r;k,l)"),
                (-1, "T(i,j;q,r;k,l)"),
            ],
            "ikmq",
            &[('j', 'i'), ('p', 'i'), ('l', 'k'), ('n', 'm'), ('r', 'q')],
        )],
        VII => vec![template(
            VII,
            1,
            "T(i,j;k,l;m,n)",
            &[
                (1, "T(p,q;i,j;k,l)"),
                (1, "T(p,q;k,l;m,n)"),
                (-1, "T(p,q;i,j;m,n)"),
            ],
            "ikmp",
            &[('j', 'i'), ('l', 'k'), ('n', 'm'), ('q', 'p')],
        )],
    }
}

/// Every index assignment (0-based) for which all elements of the template are defined.
pub fn admissible_assignments(
    cfg: &LineConfiguration,
    t: &RelationTemplate,
) -> Vec<BTreeMap<char, usize>> {
    let n = cfg.n_groups();
    let sizes = cfg.sizes();
    let mut out = Vec::new();
    let g = t.group_letters.len();
    let total_groups = n.pow(g as u32);
    for code in 0..total_groups {
        let mut asg = BTreeMap::new();
        let mut c = code;
        for &letter in &t.group_letters {
            asg.insert(letter, c % n);
            c /= n;
        }
        let all = std::iter::once(&t.lhs).chain(t.rhs.iter().map(|(_, e)| e));
        if !all.into_iter().all(|e| e.is_admissible(&asg)) {
            continue;
        }
        let ranges: Vec<usize> = t
            .offset_letters
            .iter()
            .map(|(_, grp)| sizes[asg[grp]])
            .collect();
        let count: usize = ranges.iter().product();
        for code in 0..count {
            let mut full = asg.clone();
            let mut c = code;
            for ((letter, _), r) in t.offset_letters.iter().zip(&ranges) {
                full.insert(*letter, c % r);
                c /= r;
            }
            out.push(full);
        }
    }
    out
}

/// Both sides of an instantiated relation.
pub fn relation_sides(
    cfg: &LineConfiguration,
    t: &RelationTemplate,
    asg: &BTreeMap<char, usize>,
) -> Result<(K2Symbol, K2Symbol)> {
    for letter in t
        .group_letters
        .iter()
        .chain(t.offset_letters.iter().map(|(l, _)| l))
    {
        if !asg.contains_key(letter) {
            return Err(Error::invalid(format!(
                "assignment misses letter '{letter}'"
            )));
        }
    }
    let all = std::iter::once(&t.lhs).chain(t.rhs.iter().map(|(_, e)| e));
    if !all.into_iter().all(|e| e.is_admissible(asg)) {
        return Err(Error::invalid(format!(
            "assignment violates the side conditions of {}",
            t.id
        )));
    }
    for (letter, grp) in &t.offset_letters {
        if asg[letter] >= cfg.group_size(asg[grp]) {
            return Err(Error::invalid(format!(
                "offset letter '{letter}' out of range"
            )));
        }
    }
    let lhs = t.lhs.build(cfg, asg)?;
    let mut rhs = K2Symbol::zero();
    for (k, e) in &t.rhs {
        rhs = rhs.add(&e.build(cfg, asg)?.scale(*k));
    }
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationReport {
    pub relation: String,
    pub assignment: String,
    pub statement: String,
    pub passed: bool,
    /// Nonzero `{F, G}` coefficients of LHS - RHS.
    pub function_residue: Vec<String>,
    /// Forms `F` whose constant coefficients `prod c^n` in `{c, F}` do not multiply to 1.
    pub constant_line_residue: Vec<String>,
    /// The `{c, c'}` terms before reduction.
    pub constant_residue: Vec<String>,
    pub reduction: ConstantReduction,
}

fn statement(t: &RelationTemplate, asg: &BTreeMap<char, usize>) -> String {
    let mut s = format!("{} =", t.lhs.label(asg));
    for (i, (k, e)) in t.rhs.iter().enumerate() {
        let sign = if *k < 0 {
            " -"
        } else if i == 0 {
            ""
        } else {
            " +"
        };
        s.push_str(&format!("{sign} {}", e.label(asg)));
    }
    s
}

fn assignment_string(asg: &BTreeMap<char, usize>) -> String {
    asg.iter()
        .map(|(k, v)| format!("{k}={}", v + 1))
        .collect::<Vec<_>>()
        .join(",")
}

/// Plücker-type ratios `[k,m][p,i] / ([p,m][k,i])` for distinct groups, the Steinberg candidates
/// produced by the determinant identity.
pub(crate) fn determinant_ratios(cfg: &LineConfiguration) -> Vec<ExactScalar> {
    let n = cfg.n_groups();
    let mut out = Vec::new();
    for i in 0..n {
        for k in 0..n {
            for m in 0..n {
                for p in 0..n {
                    let distinct = i != k && i != m && i != p && k != m && k != p && m != p;
                    if !distinct {
                        continue;
                    }
                    let num = cfg.det(k, m) * cfg.det(p, i);
                    let den = cfg.det(p, m) * cfg.det(k, i);
                    if let Ok(u) = num.checked_div(&den) {
                        out.push(u);
                    }
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Checks that `diff` vanishes in K2: bilinear cancellation of the function part, exact
/// cancellation of constants against each form, and reduction of the constant symbols.
/// `preferred` Steinberg candidates are tried before the generic determinant ratios.
pub fn verify_relation_sides(
    cfg: &LineConfiguration,
    relation: &str,
    label: &str,
    diff: &K2Symbol,
    preferred: &[ExactScalar],
) -> RelationReport {
    let e = expand_bilinear(diff);
    let function_residue: Vec<String> = e
        .function_part
        .iter()
        .map(|((a, b), v)| format!("{v}{{{a}, {b}}}"))
        .collect();
    let constant_line_residue: Vec<String> = e
        .constant_per_form()
        .into_iter()
        .filter(|(_, c)| !c.is_one())
        .map(|(f, c)| format!("{{{c}, {f}}}"))
        .collect();
    let constant_residue: Vec<String> = e
        .constant_constant
        .iter()
        .map(|((a, b), v)| format!("{v}{{{a}, {b}}}"))
        .collect();
    let mut hints = preferred.to_vec();
    hints.extend(determinant_ratios(cfg));
    let reduction = reduce_constant_part(&e.constant_constant, &hints);
    let passed =
        function_residue.is_empty() && constant_line_residue.is_empty() && reduction.reduced;
    RelationReport {
        relation: relation.to_string(),
        assignment: String::new(),
        statement: label.to_string(),
        passed,
        function_residue,
        constant_line_residue,
        constant_residue,
        reduction,
    }
}

/// Instantiates the template at `asg` (0-based indices) and checks LHS - RHS.
pub fn verify_relation(
    cfg: &LineConfiguration,
    t: &RelationTemplate,
    asg: &BTreeMap<char, usize>,
) -> Result<RelationReport> {
    let (lhs, rhs) = relation_sides(cfg, t, asg)?;
    let name = if relation_templates(t.id).len() > 1 {
        format!("{}.{}", t.id, t.part)
    } else {
        t.id.to_string()
    };
    let mut preferred = Vec::new();
    if t.id == RelationId::VII {
        let (i, k, m, p) = (asg[&'i'], asg[&'k'], asg[&'m'], asg[&'p']);
        preferred.push(
            cfg.det(k, m)
                .checked_mul(&cfg.det(p, i))?
                .checked_div(&cfg.det(p, m).checked_mul(&cfg.det(k, i))?)?,
        );
    }
    let mut rep = verify_relation_sides(cfg, &name, &statement(t, asg), &lhs.sub(&rhs), &preferred);
    rep.assignment = assignment_string(asg);
    Ok(rep)
}

impl RelationReport {
    /// True when the exact reducer and the independent K2(Q) detector disagree.
    pub fn detector_disagrees(&self) -> bool {
        match &self.reduction.tate {
            TateVerdict::Trivial => !self.reduction.reduced,
            TateVerdict::Nontrivial(_) => self.reduction.reduced,
            TateVerdict::Unavailable(_) => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::fixtures::t_param;

    fn four_groups() -> LineConfiguration {
        LineConfiguration::from_ints(
            &[
                (1, 0, &[0, 1]),
                (0, 1, &[0, 2]),
                (-1, 1, &[3]),
                (1, 2, &[7]),
            ],
            t_param(1, 1000),
        )
        .unwrap()
    }

    #[test]
    fn four_group_fixture_is_valid() {
        assert!(four_groups().validate().passed());
    }

    fn check_all(cfg: &LineConfiguration, id: RelationId) -> usize {
        let mut n = 0;
        for t in relation_templates(id) {
            let asgs = admissible_assignments(cfg, &t);
            assert!(!asgs.is_empty(), "{id} has no admissible assignment");
            for a in asgs {
                let r = verify_relation(cfg, &t, &a).unwrap();
                assert!(r.passed, "{r:#?}");
                assert!(!r.detector_disagrees(), "{r:#?}");
                n += 1;
            }
        }
        n
    }

    #[test]
    fn determinant_identity_holds_exactly() {
        let c = four_groups();
        for i in 0..4 {
            for k in 0..4 {
                for m in 0..4 {
                    for p in 0..4 {
                        if [i, k, m, p]
                            .iter()
                            .collect::<std::collections::BTreeSet<_>>()
                            .len()
                            < 4
                        {
                            continue;
                        }
                        let lhs = c.det(k, m) * c.det(p, i) - c.det(i, m) * c.det(p, k);
                        assert_eq!(lhs, c.det(p, m) * c.det(k, i));
                    }
                }
            }
        }
    }

    #[test]
    fn relations_one_to_three() {
        let c = four_groups();
        for id in [RelationId::I, RelationId::II, RelationId::III] {
            check_all(&c, id);
        }
        let two = LineConfiguration::from_ints(
            &[(1, 0, &[0, 1, 2]), (0, 1, &[0, 1, 5])],
            t_param(1, 100),
        )
        .unwrap();
        let t = &relation_templates(RelationId::III)[0];
        for a in admissible_assignments(&two, t) {
            let r = verify_relation(&two, t, &a).unwrap();
            assert!(r.passed && r.constant_residue.is_empty() && r.reduction.steps.is_empty());
        }
    }

    #[test]
    fn relations_four_to_seven() {
        let c = four_groups();
        for id in [
            RelationId::IV,
            RelationId::V,
            RelationId::VI,
            RelationId::VII,
        ] {
            check_all(&c, id);
        }
    }

    #[test]
    fn relation_seven_uses_the_determinant_steinberg_symbol() {
        let c = four_groups();
        let t = &relation_templates(RelationId::VII)[0];
        let asg: BTreeMap<char, usize> = [
            ('i', 0),
            ('j', 0),
            ('k', 1),
            ('l', 0),
            ('m', 2),
            ('n', 0),
            ('p', 3),
            ('q', 0),
        ]
        .into_iter()
        .collect();
        let r = verify_relation(&c, t, &asg).unwrap();
        assert!(r.passed, "{r:#?}");
        assert_eq!(r.reduction.steps.len(), 1);
        let step = &r.reduction.steps[0];
        let u = c.det(1, 2) * c.det(3, 0) / (c.det(3, 2) * c.det(1, 0));
        assert!(step.u == u || step.one_minus_u == u);
    }

    #[test]
    fn corrupted_determinant_fails() {
        let c = four_groups();
        let t = &relation_templates(RelationId::VII)[0];
        let asg: BTreeMap<char, usize> = [
            ('i', 0),
            ('j', 0),
            ('k', 1),
            ('l', 0),
            ('m', 2),
            ('n', 0),
            ('p', 3),
            ('q', 0),
        ]
        .into_iter()
        .collect();
        let (lhs, rhs) = relation_sides(&c, t, &asg).unwrap();
        // scale the first entry of the LHS by 5
        let term = lhs.terms().next().unwrap();
        let bad = K2Symbol::pair(
            term.left.scale(&ExactScalar::from_int(5)).unwrap(),
            term.right,
        );
        let r = verify_relation_sides(&c, "(vii)", "corrupted", &bad.sub(&rhs), &[]);
        assert!(!r.passed);
    }

    #[test]
    fn bad_assignments_are_rejected() {
        let c = four_groups();
        let t = &relation_templates(RelationId::VII)[0];
        let asg: BTreeMap<char, usize> = [
            ('i', 0),
            ('j', 0),
            ('k', 0),
            ('l', 0),
            ('m', 2),
            ('n', 0),
            ('p', 3),
            ('q', 0),
        ]
        .into_iter()
        .collect();
        assert!(verify_relation(&c, t, &asg).is_err());
        assert_eq!(RelationId::parse("(vi)").unwrap(), RelationId::VI);
    }
}
