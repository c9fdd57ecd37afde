//! Sign conditions on the strengths that select an existence result.
//!
//! Every inequality is decided exactly on the rational values of the
//! floating-point inputs. Values within a relative band of 1e−12 of the
//! threshold are reported as boundary cases and never count as satisfied.

use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::hamiltonian::Strengths;

/// Relative width of the boundary-case band.
pub const BOUNDARY_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    N2,
    N3,
    N4,
    None,
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::N2 => "N2",
            Theorem::N3 => "N3",
            Theorem::N4 => "N4",
            Theorem::None => "None",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Boundary,
}

/// One checked quantity that must be strictly negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// 1-based indices involved.
    pub indices: Vec<usize>,
    pub value: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hyp1Report {
    pub holds: bool,
    /// `ΓᵢΓᵢ₊₁` for consecutive pairs.
    pub adjacent: Vec<Witness>,
    /// `Σ_{i≠j∈I} ΓᵢΓⱼ` over ordered pairs for every `|I| ≥ 3`.
    pub subsets: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub n: usize,
    pub hyp1: Option<Hyp1Report>,
    /// `|Γ₂| − |Γ₁| − |Γ₃|` and `|Γ₃| − |Γ₂| − |Γ₄|` (N = 4 only).
    pub hyp2: Option<(bool, Vec<Witness>)>,
    pub applicable: Theorem,
    pub failures: Vec<String>,
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("strengths are finite")
}

/// Decides `value < 0` exactly, with a band of `BOUNDARY_BAND · scale`.
fn negative(value: &BigRational, scale: f64) -> Verdict {
    let band = rational(BOUNDARY_BAND * scale);
    if value.abs() <= band {
        Verdict::Boundary
    } else if value.is_negative() {
        Verdict::Holds
    } else {
        Verdict::Fails
    }
}

fn witness(indices: Vec<usize>, value: BigRational, scale: f64) -> Witness {
    let verdict = negative(&value, scale);
    Witness {
        indices,
        value: value.to_f64().unwrap_or(f64::NAN),
        verdict,
    }
}

pub fn check_hyp1(gamma: &Strengths) -> Result<Hyp1Report> {
    let g = gamma.as_slice();
    if g.len() < 2 {
        return Err(Error::Arity("the sign conditions need at least two vortices".into()));
    }
    let q: Vec<BigRational> = g.iter().map(|&x| rational(x)).collect();
    let scale: f64 = g.iter().map(|x| x * x).sum();
    let adjacent: Vec<Witness> = (0..g.len() - 1)
        .map(|i| witness(vec![i + 1, i + 2], &q[i] * &q[i + 1], scale))
        .collect();
    let mut subsets = Vec::new();
    for mask in 0u32..(1 << g.len()) {
        if mask.count_ones() < 3 {
            continue;
        }
        let idx: Vec<usize> = (0..g.len()).filter(|i| mask & (1 << i) != 0).collect();
        let mut sum = BigRational::zero();
        let mut squares = BigRational::zero();
        for &i in &idx {
            sum += &q[i];
            squares += &q[i] * &q[i];
        }
        subsets.push(witness(idx.iter().map(|i| i + 1).collect(), &sum * &sum - squares, scale));
    }
    subsets.sort_by_key(|w| (w.indices.len(), w.indices.clone()));
    let holds = adjacent.iter().chain(&subsets).all(|w| w.verdict == Verdict::Holds);
    Ok(Hyp1Report {
        holds,
        adjacent,
        subsets,
    })
}

pub fn check_hyp2_witnesses(gamma: &Strengths) -> Result<(bool, Vec<Witness>)> {
    let g = gamma.as_slice();
    if g.len() != 4 {
        return Err(Error::Arity(format!(
            "the second condition is stated for four vortices, got {}",
            g.len()
        )));
    }
    let a: Vec<BigRational> = g.iter().map(|&x| rational(x.abs())).collect();
    let scale = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let w = vec![
        witness(vec![1, 2, 3], &a[1] - &a[0] - &a[2], scale),
        witness(vec![2, 3, 4], &a[2] - &a[1] - &a[3], scale),
    ];
    let holds = w.iter().all(|w| w.verdict == Verdict::Holds);
    Ok((holds, w))
}

pub fn check_hyp2(gamma: &Strengths) -> Result<bool> {
    Ok(check_hyp2_witnesses(gamma)?.0)
}

fn describe(w: &Witness, what: &str) -> Option<String> {
    let set = w
        .indices
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",");
    match w.verdict {
        Verdict::Holds => None,
        Verdict::Fails => Some(format!("{what} over {{{set}}} is {:e}, not < 0", w.value)),
        Verdict::Boundary => Some(format!(
            "{what} over {{{set}}} is {:e}: boundary case, strict inequality not certified",
            w.value
        )),
    }
}

pub fn applicability(gamma: &Strengths) -> Result<HypothesisReport> {
    let n = gamma.len();
    if !(2..=4).contains(&n) {
        return Err(Error::Arity(format!(
            "existence results cover 2 to 4 vortices, got {n}"
        )));
    }
    let mut failures = Vec::new();
    let (hyp1, hyp2, applicable) = if n == 2 {
        let g = gamma.as_slice();
        let prod = rational(g[0]) * rational(g[1]);
        let ok = prod.is_negative();
        if !ok {
            failures.push("Γ₁Γ₂ ≥ 0".to_string());
        }
        (None, None, if ok { Theorem::N2 } else { Theorem::None })
    } else {
        let h1 = check_hyp1(gamma)?;
        for w in &h1.adjacent {
            failures.extend(describe(w, "adjacent product"));
        }
        for w in &h1.subsets {
            failures.extend(describe(w, "subset pair sum"));
        }
        let h2 = if n == 4 {
            let h2 = check_hyp2_witnesses(gamma)?;
            for w in &h2.1 {
                failures.extend(describe(w, "|Γ_mid| − |Γ_left| − |Γ_right|"));
            }
            Some(h2)
        } else {
            None
        };
        let ok = h1.holds && h2.as_ref().is_none_or(|h| h.0);
        let thm = match (ok, n) {
            (true, 3) => Theorem::N3,
            (true, 4) => Theorem::N4,
            _ => Theorem::None,
        };
        (Some(h1), h2, thm)
    };
    Ok(HypothesisReport {
        n,
        hyp1,
        hyp2,
        applicable,
        failures,
    })
}
