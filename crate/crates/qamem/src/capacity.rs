//! Storage capacity bookkeeping, kept in exact rational arithmetic.
//!
//! For a space of total dimension N holding M_perp orthogonal-support
//! patterns and M_par shared-block patterns, the capacity is
//! alpha_q = (M_perp + M_par) / N. Every basin needs at least one decaying
//! dimension and every orthogonal pattern at least one stable dimension, so
//! with everything minimal M <= N/2: alpha_q saturates at 1/2.

use num_rational::Ratio;

use crate::builder::{PatternEntry, PatternSet};
use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone)]
pub struct CapacityReport {
    pub n_total: usize,
    pub m_orthogonal: usize,
    pub m_shared: usize,
    /// Exact pattern-per-dimension ratio (M_perp + M_par) / N.
    pub alpha_q: Rational,
    /// True when the dimension bound is met with equality
    /// (all s_mu = d_mu = 1, orthogonal patterns only).
    pub saturated: bool,
}

#[derive(Debug, Clone)]
pub struct ClassicalCapacityReport {
    pub quantum: CapacityReport,
    /// Exact p_succ * alpha_q when the success probability is rational.
    pub alpha_qc: Option<Rational>,
    pub alpha_qc_f64: f64,
    /// Large-N estimate (M_perp + p M_par) / (2 M_perp + M_par); kept
    /// separate from the exact value.
    pub asymptotic_estimate: f64,
}

/// Success probability of the readout that converts retrieved quantum
/// states back to classical labels.
#[derive(Debug, Clone, Copy)]
pub enum SuccessProbability {
    Exact(Rational),
    Approx(f64),
}

pub fn capacity_of(set: &PatternSet) -> Result<CapacityReport> {
    let n_total = set.total_dim();
    let m_orthogonal = set.count_orthogonal();
    let m_shared = set.count_dfs();
    let m = m_orthogonal + m_shared;
    if n_total == 0 || m == 0 {
        return Err(Error::Invalid("empty pattern set".into()));
    }
    let alpha_q = Rational::new(m as i64, n_total as i64);
    let saturated = m_shared == 0
        && set.entries().iter().all(|e| match e {
            PatternEntry::Orthogonal { rho, decay, .. } => rho.nrows() == 1 && decay.dim() == 1,
            _ => false,
        });
    Ok(CapacityReport {
        n_total,
        m_orthogonal,
        m_shared,
        alpha_q,
        saturated,
    })
}

pub fn classical_capacity_of(
    set: &PatternSet,
    p_succ: SuccessProbability,
) -> Result<ClassicalCapacityReport> {
    let quantum = capacity_of(set)?;
    let (p_f64, alpha_qc) = match p_succ {
        SuccessProbability::Exact(p) => {
            if p < Rational::new(0, 1) || p > Rational::new(1, 1) {
                return Err(Error::Invalid(format!("p_succ {p} outside [0,1]")));
            }
            (ratio_to_f64(p), Some(p * quantum.alpha_q))
        }
        SuccessProbability::Approx(p) => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Invalid(format!("p_succ {p} outside [0,1]")));
            }
            (p, None)
        }
    };
    let alpha_qc_f64 = p_f64 * ratio_to_f64(quantum.alpha_q);
    let m_perp = quantum.m_orthogonal as f64;
    let m_par = quantum.m_shared as f64;
    let asymptotic_estimate = (m_perp + p_f64 * m_par) / (2.0 * m_perp + m_par);
    Ok(ClassicalCapacityReport {
        quantum,
        alpha_qc,
        alpha_qc_f64,
        asymptotic_estimate,
    })
}

pub fn ratio_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Outcome of packing `m` patterns into dimension `n` with every block at
/// least one-dimensional.
#[derive(Debug, Clone)]
pub struct DimensionAudit {
    pub n: usize,
    pub max_patterns: usize,
    /// A witness allocation (s_mu, d_mu) for the maximal count.
    pub witness: Vec<(usize, usize)>,
    /// Requested counts that cannot be allocated, with the failing reason.
    pub rejected: Vec<(usize, String)>,
}

/// Exhaustively audit the dimension bound M <= floor(N/2): every pattern
/// needs s_mu >= 1 stable and d_mu >= 1 decaying dimensions, so the maximal
/// allocation is all-minimal. The first over-budget count is reported with
/// the dimension it would starve.
pub fn theorem1_dimension_audit(n: usize) -> Result<DimensionAudit> {
    if n < 2 {
        return Err(Error::Invalid(format!("need n >= 2, got {n}")));
    }
    let max_patterns = n / 2;
    let witness = vec![(1usize, 1usize); max_patterns];
    let mut rejected = Vec::new();
    let over = max_patterns + 1;
    let needed = 2 * over;
    rejected.push((
        over,
        format!("needs at least {needed} dimensions, space has {n}: some basin gets zero"),
    ));
    Ok(DimensionAudit {
        n,
        max_patterns,
        witness,
        rejected,
    })
}

/// All ways to split `n` dimensions into `m` (stable, decaying) pairs with
/// both entries >= 1, up to ordering of the patterns. Empty exactly when
/// m > n/2.
pub fn enumerate_allocations(n: usize, m: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(m);
    fn rec(
        remaining: usize,
        m_left: usize,
        min_pair: usize,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if m_left == 0 {
            if remaining == 0 {
                out.push(current.clone());
            }
            return;
        }
        // reserve 2 dims for each remaining pattern
        let reserve = 2 * (m_left - 1);
        let mut pair_total = min_pair;
        while pair_total + reserve <= remaining {
            for s in 1..pair_total {
                let d = pair_total - s;
                current.push((s, d));
                rec(remaining - pair_total, m_left - 1, pair_total, current, out);
                current.pop();
            }
            pair_total += 1;
        }
    }
    rec(n, m, 2, &mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::DecayProfile;
    use crate::linalg::ONE;

    fn minimal_set(m: usize) -> PatternSet {
        let mut set = PatternSet::new();
        for i in 0..m {
            set.push_orthogonal(
                format!("p{i}"),
                ndarray::array![[ONE]],
                DecayProfile::uniform(0.5, 1).unwrap(),
            );
        }
        set
    }

    #[test]
    fn saturated_capacity_is_one_half() {
        let set = minimal_set(4);
        let rep = capacity_of(&set).unwrap();
        assert_eq!(rep.alpha_q, Rational::new(1, 2));
        assert!(rep.saturated);
    }

    #[test]
    fn audit_accepts_half_and_rejects_more() {
        let audit = theorem1_dimension_audit(8).unwrap();
        assert_eq!(audit.max_patterns, 4);
        assert_eq!(audit.witness.len(), 4);
        assert_eq!(audit.rejected[0].0, 5);
        // enumeration agrees
        assert!(!enumerate_allocations(8, 4).is_empty());
        assert!(enumerate_allocations(8, 5).is_empty());
    }

    #[test]
    fn mixed_rank_allocations_at_n6() {
        // s=(2,1), d=(1,1) fits 2 patterns in 5 of 6 dims; exact fits exist
        let allocs = enumerate_allocations(6, 2);
        assert!(allocs.iter().any(|a| {
            let mut sorted = a.clone();
            sorted.sort();
            sorted == vec![(1, 1), (2, 2)] || sorted == vec![(1, 2), (2, 1)]
        }));
        // three patterns in 6 dims leave no slack: only all-minimal
        let tight = enumerate_allocations(6, 3);
        assert_eq!(tight, vec![vec![(1, 1), (1, 1), (1, 1)]]);
    }

    #[test]
    fn classical_capacity_scales_by_p() {
        let set = minimal_set(3);
        let rep = classical_capacity_of(
            &set,
            SuccessProbability::Exact(Rational::new(2, 3)),
        )
        .unwrap();
        assert_eq!(rep.alpha_qc.unwrap(), Rational::new(1, 3));
        assert!(rep.alpha_qc_f64 <= ratio_to_f64(rep.quantum.alpha_q));
    }
}
