//! Kullback–Leibler divergence on finite partitions and a perturbation
//! bound on how much the divergence can drop when both arguments are
//! replaced by nearby measures.

use super::ShadowMeasure;
use crate::error::{Error, Result};
use crate::stats::KahanSum;

/// A KL divergence value; `infinite` is set when some cell has positive
/// first-argument mass but zero second-argument mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KlValue {
    /// The divergence in nats; `f64::INFINITY` when `infinite` is set.
    pub nats: f64,
    pub infinite: bool,
}

fn check_probability_vector(name: &str, v: &[f64]) -> Result<()> {
    let mut sum = KahanSum::new();
    for &x in v {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::Config(format!(
                "{name} must contain finite non-negative masses; found {x}"
            )));
        }
        sum.add(x);
    }
    if (sum.value() - 1.0).abs() > 1e-7 {
        return Err(Error::Config(format!(
            "{name} must sum to 1; found {}",
            sum.value()
        )));
    }
    Ok(())
}

/// KL divergence `Σ p(A)·ln(p(A)/q(A))` of two probability vectors on the
/// same finite partition.
///
/// Cells with `p(A) = 0` contribute nothing. A cell with `p(A) > 0` and
/// `q(A) = 0` makes the divergence infinite, which is flagged rather than
/// returned as a silent NaN.
pub fn kl_on_partition(p: &[f64], q: &[f64]) -> Result<KlValue> {
    if p.len() != q.len() {
        return Err(Error::Config(format!(
            "KL divergence needs equal partition sizes; got {} and {}",
            p.len(),
            q.len()
        )));
    }
    if p.is_empty() {
        return Err(Error::Config("KL divergence needs a non-empty partition".into()));
    }
    check_probability_vector("first argument", p)?;
    check_probability_vector("second argument", q)?;
    let mut sum = KahanSum::new();
    for (&pi, &qi) in p.iter().zip(q.iter()) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Ok(KlValue {
                nats: f64::INFINITY,
                infinite: true,
            });
        }
        sum.add(pi * (pi / qi).ln());
    }
    // Float cancellation can leave a tiny negative residue when p == q.
    Ok(KlValue {
        nats: sum.value().max(0.0),
        infinite: false,
    })
}

/// KL divergence between two empirical shadow measures; their partitions
/// must be identical.
pub fn kl_between_shadows(p: &ShadowMeasure, q: &ShadowMeasure) -> Result<KlValue> {
    if p.partition() != q.partition() {
        return Err(Error::Config(
            "KL divergence requires identical shadow partitions".into(),
        ));
    }
    kl_on_partition(&p.masses(), &q.masses())
}

/// Upper bound on the drop in KL divergence under perturbation of both
/// arguments:
///
/// `KL(p‖q) − KL(p′‖q′) ≤ ln(max_A q′(A)/q(A)) + 2·√C·max_A |1 − p′(A)/p(A)|`
///
/// with `C = max_A p(A)/q(A)`. The reference measures `p` and `q` must be
/// strictly positive on every cell; the perturbed measures may vanish.
pub fn reverse_pinsker_gap_bound(p: &[f64], q: &[f64], p2: &[f64], q2: &[f64]) -> Result<f64> {
    let len = p.len();
    if q.len() != len || p2.len() != len || q2.len() != len {
        return Err(Error::Config(
            "gap bound needs four vectors on the same partition".into(),
        ));
    }
    if len == 0 {
        return Err(Error::Config("gap bound needs a non-empty partition".into()));
    }
    check_probability_vector("first reference measure", p)?;
    check_probability_vector("second reference measure", q)?;
    check_probability_vector("first perturbed measure", p2)?;
    check_probability_vector("second perturbed measure", q2)?;
    if p.iter().any(|&x| x == 0.0) || q.iter().any(|&x| x == 0.0) {
        return Err(Error::Config(
            "gap bound requires strictly positive reference measures".into(),
        ));
    }
    let mut density_sup: f64 = 0.0; // C = max p/q
    let mut q_ratio_sup: f64 = 0.0; // max q2/q
    let mut p_dev_sup: f64 = 0.0; // max |1 - p2/p|
    for i in 0..len {
        density_sup = density_sup.max(p[i] / q[i]);
        q_ratio_sup = q_ratio_sup.max(q2[i] / q[i]);
        p_dev_sup = p_dev_sup.max((1.0 - p2[i] / p[i]).abs());
    }
    Ok(q_ratio_sup.ln() + 2.0 * density_sup.sqrt() * p_dev_sup)
}
