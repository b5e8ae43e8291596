//! The R and T elements, the generator list and the elements attached to points of S.

use serde::Serialize;

use super::{K2Symbol, Monomial};
use crate::config::{in_special_set, IntersectionPoint, LineConfiguration, LineId};
use crate::error::{Error, Result};

/// A symbol with a human-readable label such as `R(1:1,2;2:1,2)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NamedElement {
    pub label: String,
    pub symbol: K2Symbol,
}

fn check_index(cfg: &LineConfiguration, group: usize, offset: usize) -> Result<()> {
    cfg.check_line(LineId::new(group, offset))
}

/// `R(i:j,k; l:m,n) = {L_ij / L_ik, L_lm / L_ln}`; indices are 0-based.
pub fn r_element(
    cfg: &LineConfiguration,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    m: usize,
    n: usize,
) -> Result<K2Symbol> {
    if j == k || m == n {
        return Err(Error::invalid("R element needs j != k and m != n"));
    }
    r_element_raw(cfg, i, j, k, l, m, n)
}

/// Same as [`r_element`] but allows `j = k` or `m = n` (the zero symbol), as needed inside relations.
pub(crate) fn r_element_raw(
    cfg: &LineConfiguration,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    m: usize,
    n: usize,
) -> Result<K2Symbol> {
    if i == l {
        return Err(Error::invalid("R element needs i != l"));
    }
    for (g, o) in [(i, j), (i, k), (l, m), (l, n)] {
        check_index(cfg, g, o)?;
    }
    if j == k || m == n {
        return Ok(K2Symbol::zero());
    }
    Ok(K2Symbol::pair(
        Monomial::line_ratio(LineId::new(i, j), LineId::new(i, k)),
        Monomial::line_ratio(LineId::new(l, m), LineId::new(l, n)),
    ))
}

/// `T(i,j; k,l; m,n) = {([i,m]/[k,m]) L_kl / L_ij, ([i,k]/[m,k]) L_mn / L_ij}`; indices are 0-based.
pub fn t_element(
    cfg: &LineConfiguration,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    m: usize,
    n: usize,
) -> Result<K2Symbol> {
    if i == k || i == m || k == m {
        return Err(Error::invalid(
            "T element needs pairwise distinct groups i, k, m",
        ));
    }
    for (g, o) in [(i, j), (k, l), (m, n)] {
        check_index(cfg, g, o)?;
    }
    let c1 = cfg.det(i, m).checked_div(&cfg.det(k, m))?;
    let c2 = cfg.det(i, k).checked_div(&cfg.det(m, k))?;
    let base = LineId::new(i, j);
    let left = Monomial::line_ratio(LineId::new(k, l), base).scale(&c1)?;
    let right = Monomial::line_ratio(LineId::new(m, n), base).scale(&c2)?;
    Ok(K2Symbol::pair(left, right))
}

pub(crate) fn r_label(i: usize, j: usize, k: usize, l: usize, m: usize, n: usize) -> String {
    format!(
        "R({}:{},{};{}:{},{})",
        i + 1,
        j + 1,
        k + 1,
        l + 1,
        m + 1,
        n + 1
    )
}

pub(crate) fn t_label(i: usize, j: usize, k: usize, l: usize, m: usize, n: usize) -> String {
    format!(
        "T({},{};{},{};{},{})",
        i + 1,
        j + 1,
        k + 1,
        l + 1,
        m + 1,
        n + 1
    )
}

/// The three generator families, in order.
pub fn generator_list(cfg: &LineConfiguration) -> Result<Vec<NamedElement>> {
    cfg.ensure_valid()?;
    let sizes = cfg.sizes();
    let n = sizes.len();
    let mut out = Vec::new();
    for j in 1..sizes[0] {
        for m in 1..sizes[1] {
            out.push(NamedElement {
                label: r_label(0, 0, j, 1, 0, m),
                symbol: r_element(cfg, 0, 0, j, 1, 0, m)?,
            });
        }
    }
    for k in 1..n {
        for m in k + 1..n {
            for l in 0..sizes[k] {
                for nn in 0..sizes[m] {
                    out.push(NamedElement {
                        label: t_label(0, 0, k, l, m, nn),
                        symbol: t_element(cfg, 0, 0, k, l, m, nn)?,
                    });
                }
            }
        }
    }
    for j in 1..sizes[0] {
        for m in 2..n {
            for nn in 0..sizes[m] {
                out.push(NamedElement {
                    label: t_label(0, j, 1, 0, m, nn),
                    symbol: t_element(cfg, 0, j, 1, 0, m, nn)?,
                });
            }
        }
    }
    Ok(out)
}

/// The element `M_s` attached to a point `s = P_{i,j;k,l}` of S.
pub fn m_for_point(cfg: &LineConfiguration, s: &IntersectionPoint) -> Result<NamedElement> {
    if !in_special_set(s) {
        return Err(Error::invalid(format!("{s} is not in S")));
    }
    let (i, j, k, l) = (
        s.first.group,
        s.first.offset,
        s.second.group,
        s.second.offset,
    );
    cfg.check_line(s.first)?;
    cfg.check_line(s.second)?;
    if i >= k {
        return Err(Error::invalid(format!(
            "{s}: first group must precede second"
        )));
    }
    if i == 0 && k == 1 {
        Ok(NamedElement {
            label: r_label(0, j, 0, 1, l, 0),
            symbol: r_element(cfg, 0, j, 0, 1, l, 0)?,
        })
    } else if i >= 1 {
        Ok(NamedElement {
            label: t_label(0, 0, i, j, k, l),
            symbol: t_element(cfg, 0, 0, i, j, k, l)?,
        })
    } else {
        let a = t_element(cfg, 0, j, 1, 0, k, l)?;
        let b = t_element(cfg, 0, 0, 1, 0, k, l)?;
        Ok(NamedElement {
            label: format!(
                "{} - {}",
                t_label(0, j, 1, 0, k, l),
                t_label(0, 0, 1, 0, k, l)
            ),
            symbol: a.sub(&b),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ExactScalar;
    use crate::config::fixtures::*;

    #[test]
    fn r_element_instantiation_and_errors() {
        let c = cfg_b();
        let r = r_element(&c, 0, 1, 0, 1, 1, 0).unwrap();
        let t = r.terms().next().unwrap();
        assert_eq!(
            t.left,
            Monomial::line_ratio(LineId::new(0, 1), LineId::new(0, 0))
        );
        assert_eq!(
            t.right,
            Monomial::line_ratio(LineId::new(1, 1), LineId::new(1, 0))
        );
        assert!(r_element(&c, 0, 1, 0, 0, 1, 0).is_err());
        assert!(r_element(&c, 0, 1, 1, 1, 1, 0).is_err());
        assert!(r_element(&c, 0, 2, 0, 1, 1, 0).is_err());
    }

    #[test]
    fn t_element_constants() {
        let c = cfg_a();
        // det[1,3] = 1, det[2,3] = 1, det[1,2] = 1, det[3,2] = -1
        let t = t_element(&c, 0, 0, 1, 0, 2, 0).unwrap();
        let term = t.terms().next().unwrap();
        assert_eq!(
            term.left.constant,
            c.det(0, 2).checked_div(&c.det(1, 2)).unwrap()
        );
        assert_eq!(term.left.constant, ExactScalar::from_int(1));
        assert_eq!(term.right.constant, ExactScalar::from_int(-1));
        assert!(t_element(&c, 0, 0, 0, 0, 2, 0).is_err());
    }

    #[test]
    fn generator_counts() {
        let a = generator_list(&cfg_a()).unwrap();
        assert_eq!(
            a.iter().map(|e| e.label.as_str()).collect::<Vec<_>>(),
            ["T(1,1;2,1;3,1)"]
        );
        let b = generator_list(&cfg_b()).unwrap();
        assert_eq!(
            b.iter().map(|e| e.label.as_str()).collect::<Vec<_>>(),
            ["R(1:1,2;2:1,2)"]
        );
        assert_eq!(generator_list(&cfg_c()).unwrap().len(), 4);
    }

    #[test]
    fn m_elements_by_case() {
        let a = cfg_a();
        let s = a.special_set_s().unwrap();
        assert_eq!(m_for_point(&a, &s[0]).unwrap().label, "T(1,1;2,1;3,1)");
        let b = cfg_b();
        let s = b.special_set_s().unwrap();
        assert_eq!(m_for_point(&b, &s[0]).unwrap().label, "R(1:2,1;2:2,1)");
        let c = cfg_c();
        let p = c
            .intersection(LineId::new(0, 1), LineId::new(2, 0))
            .unwrap();
        let m = m_for_point(&c, &p).unwrap();
        assert_eq!(m.label, "T(1,2;2,1;3,1) - T(1,1;2,1;3,1)");
        assert_eq!(m.symbol.len(), 2);
        let bad = c
            .intersection(LineId::new(0, 0), LineId::new(1, 1))
            .unwrap();
        assert!(m_for_point(&c, &bad).is_err());
        assert_eq!(c.special_set_s().unwrap().len(), 4);
    }
}
