//! Explicit witnesses for ergodicity of `T × T^{α_1} × ... × T^{α_{v-1}}` on
//! `(t, q)` constructions with a unit gap in `φ`.
//!
//! With `H_{n+ℓ} = {φ(x) h_{n+ℓ}}` and `h_{n+ℓ} = k^ℓ h_n + K_ℓ`, choosing
//! `(a_{q,ℓ}, d_{q,ℓ}) = (φ(x) h_{n+ℓ}, φ(y) h_{n+ℓ})` along a digit expansion
//! `k^j - γ|α_q| = Σ k^ℓ (φ(y) - φ(x))`, then `r_q` stages of `(0, max H)`, then
//! one unit-gap stage, yields `a_q - d_q = γ α_q h_n ± (L_q + r_q)`. Coordinate
//! 0 uses the expansion of `k^m - γ`. Solving for `r_q` gives
//! `a_q - d_q = α_q (a_0 - d_0 - b_0) + b_q`.

use serde::Serialize;

use super::matching::MatchWitness;
use super::{Certificate, CertificateKind, Verdict};
use crate::construction::LevelRef;
use crate::error::{Error, Result};
use crate::families::{make_tq, TqParams};
use crate::measure::Measure;
use crate::spec::{RankOneSpec, Tower};
use crate::sumsets::{decompose, gamma_search, DigitAlphabet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CoordinatePlan {
    pub coordinate: usize,
    /// Multiplier, with `α_0 = 1`.
    pub alpha: i64,
    /// Digits `c_ℓ` of `k^j - γ|α|` (or `k^m - γ` for coordinate 0).
    pub digits: Vec<i64>,
    /// Index pairs `(x_ℓ, y_ℓ)` with `φ(x_ℓ) - φ(y_ℓ) = -c_ℓ`.
    pub pairs: Vec<(usize, usize)>,
    pub l_value: i64,
    pub r_value: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PwmWitness {
    pub params: TqParams,
    pub alpha: Vec<i64>,
    pub b: Vec<i64>,
    pub base_stage: usize,
    pub gamma: i64,
    pub m: u32,
    pub j: u32,
    pub unit_pair: (usize, usize),
    pub plans: Vec<CoordinatePlan>,
    /// Number of fixed summand stages, `max_q (len_q + r_q) + 1`.
    pub z: usize,
    /// `t^{-vz}`.
    pub beta: Measure,
    pub witness: MatchWitness,
    pub verdict: Verdict,
    #[serde(skip)]
    spec: RankOneSpec,
}

impl PwmWitness {
    pub fn certificate(&self) -> Certificate {
        Certificate::build(
            CertificateKind::PwmWitness,
            Some(&self.spec),
            serde_json::json!({
                "alpha": self.alpha,
                "b": self.b,
                "baseStage": self.base_stage,
            }),
            self.verdict,
            self,
        )
    }
}

/// Smallest `x` with `φ(x) - φ(y) = diff` for some `y`.
fn pair_for(phi: &[i64], diff: i64) -> Option<(usize, usize)> {
    (0..phi.len()).find_map(|x| {
        phi.iter()
            .position(|&py| phi[x] - py == diff)
            .map(|y| (x, y))
    })
}

fn summands(
    tower: &Tower,
    n: usize,
    phi: &[i64],
    plan: &CoordinatePlan,
    unit: (usize, usize),
    z: usize,
) -> (Vec<i64>, Vec<i64>) {
    let top = phi.len() - 1;
    let len = plan.pairs.len();
    let mut a = vec![0i64; z];
    let mut d = vec![0i64; z];
    for (l, slot) in (0..z).map(|l| (l, tower.height(n + l))) {
        let (x, y) = if l < len {
            plan.pairs[l]
        } else if l < len + plan.r_value as usize {
            (0, top)
        } else if l == len + plan.r_value as usize {
            unit
        } else {
            (0, 0)
        };
        a[l] = phi[x] * slot;
        d[l] = phi[y] * slot;
    }
    if plan.alpha < 0 {
        (d, a)
    } else {
        (a, d)
    }
}

pub fn pwm_witness(
    params: &TqParams,
    alpha: &[i64],
    b: &[i64],
    n: usize,
    horizon: u32,
) -> Result<PwmWitness> {
    if !params.has_unit_gap() {
        return Err(Error::HypothesisUnmet(
            "every non-final subcolumn carries a spacer block, so φ has no unit gap".into(),
        ));
    }
    if alpha.is_empty() || alpha.contains(&0) {
        return Err(Error::ParamOutOfRange(
            "alpha must be a nonempty tuple of nonzero integers".into(),
        ));
    }
    if b.len() != alpha.len() + 1 {
        return Err(Error::ParamOutOfRange(format!(
            "b has {} entries, expected {}",
            b.len(),
            alpha.len() + 1
        )));
    }
    let (spec, _) = make_tq(params.t, params.q, params.positions.clone())?;
    let h_n = spec.tower(n)?.height(n);
    if let Some(x) = b.iter().find(|x| !(0..=h_n).contains(*x)) {
        return Err(Error::ParamOutOfRange(format!(
            "shift {x} outside 0..={h_n}"
        )));
    }
    let phi = params.phi();
    let k = params.k();
    let digits = DigitAlphabet::new(k, phi.clone())?;
    let mut betas: Vec<i64> = alpha.iter().map(|a| a.abs()).collect();
    betas.sort_unstable();
    betas.dedup();
    let found = gamma_search(&digits, &betas, horizon)?;
    let unit = pair_for(&phi, 1).expect("unit gap exists");

    let k_sum = |l: usize| -> i64 { (0..l).map(|i| k.pow(i as u32)).sum() };
    let plan_for = |coordinate: usize, a: i64, ds: &[i64]| -> Result<CoordinatePlan> {
        let pairs = ds
            .iter()
            .map(|&c| {
                pair_for(&phi, -c)
                    .ok_or_else(|| Error::InvalidWitness(format!("digit {c} not in A - A")))
            })
            .collect::<Result<Vec<_>>>()?;
        let l_value = pairs
            .iter()
            .enumerate()
            .map(|(l, &(x, y))| k_sum(l) * (k - 1 + phi[x] - phi[y]))
            .sum::<i64>()
            + pairs.len() as i64;
        Ok(CoordinatePlan {
            coordinate,
            alpha: a,
            digits: ds.to_vec(),
            pairs,
            l_value,
            r_value: 0,
        })
    };
    let mut plans = vec![plan_for(0, 1, &found.base_check.1)?];
    for (q, &a) in alpha.iter().enumerate() {
        let ds = &found
            .beta_checks
            .iter()
            .find(|c| c.0 == a.abs())
            .expect("every multiplier checked")
            .2;
        plans.push(plan_for(q + 1, a, ds)?);
    }
    // Smallest r_0 >= 0 with r_q = |α_q|(L_0 + r_0 - b_0) + sgn(α_q) b_q - L_q >= 1.
    let l0 = plans[0].l_value;
    let r0 = plans[1..]
        .iter()
        .map(|p| {
            let need = 1 + p.l_value - p.alpha.signum() * b[p.coordinate];
            let per = p.alpha.abs();
            (need + per - 1).div_euclid(per) - l0 + b[0]
        })
        .max()
        .unwrap_or(0)
        .max(0);
    plans[0].r_value = r0;
    for p in plans.iter_mut().skip(1) {
        p.r_value =
            p.alpha.abs() * (l0 + r0 - b[0]) + p.alpha.signum() * b[p.coordinate] - p.l_value;
    }
    let z = plans
        .iter()
        .map(|p| p.pairs.len() + p.r_value as usize + 1)
        .max()
        .expect("coordinate 0 present");
    let tower = spec.tower(n + z)?;
    let level = LevelRef::new(n, 0);
    let mut a_summands = Vec::new();
    let mut d_summands = Vec::new();
    for p in &plans {
        let (a, d) = summands(&tower, n, &phi, p, unit, z);
        a_summands.push(a);
        d_summands.push(d);
    }
    let a: Vec<i64> = a_summands.iter().map(|s| s.iter().sum()).collect();
    let d: Vec<i64> = d_summands.iter().map(|s| s.iter().sum()).collect();
    for (q, x) in a.iter().chain(&d).enumerate() {
        let expected = if q < a.len() {
            &a_summands[q]
        } else {
            &d_summands[q - a.len()]
        };
        if decompose(&tower, level, n + z, *x).as_ref() != Some(expected) {
            return Err(Error::InvalidWitness(format!(
                "{x} is not the descendant with summands {expected:?}"
            )));
        }
    }
    let base = a[0] - d[0] - b[0];
    let alphas: Vec<i64> = std::iter::once(1).chain(alpha.iter().copied()).collect();
    for q in 1..a.len() {
        if a[q] - d[q] != alphas[q] * base + b[q] {
            return Err(Error::InvalidWitness(format!(
                "coordinate {q}: a - d = {} but α(a_0 - d_0 - b_0) + b = {}",
                a[q] - d[q],
                alphas[q] * base + b[q]
            )));
        }
    }
    let residuals: Vec<i64> = (0..a.len())
        .map(|q| (a[q] - d[q] - b[q]) / alphas[q])
        .collect();
    let v = a.len() as u32;
    let beta = Measure::one().ratio_to(&Measure::from_integer(params.t as u64).pow(v * z as u32));
    Ok(PwmWitness {
        params: params.clone(),
        alpha: alpha.to_vec(),
        b: b.to_vec(),
        base_stage: n,
        gamma: found.gamma,
        m: found.m,
        j: found.n,
        unit_pair: unit,
        plans,
        z,
        beta,
        witness: MatchWitness {
            a,
            d,
            a_summands,
            d_summands,
            moves: Vec::new(),
            shift: residuals[0],
            residuals,
        },
        verdict: Verdict::Holds,
        spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tq41() -> TqParams {
        TqParams::new(4, 1, vec![1]).unwrap()
    }

    #[test]
    fn doubling_example() {
        let w = pwm_witness(&tq41(), &[2], &[0, 0], 1, 6).unwrap();
        assert_eq!((w.gamma, w.m, w.j), (1, 1, 1));
        let l: Vec<i64> = w.plans.iter().map(|p| p.l_value).collect();
        let r: Vec<i64> = w.plans.iter().map(|p| p.r_value).collect();
        assert_eq!((l, r), (vec![1, 1], vec![0, 1]));
        let m = &w.witness;
        assert_eq!((m.a[0] - m.d[0], m.a[1] - m.d[1]), (7, 14));
    }

    #[test]
    fn negative_multiplier() {
        let w = pwm_witness(&tq41(), &[-3], &[0, 2], 1, 6).unwrap();
        let m = &w.witness;
        assert_eq!(m.a[1] - m.d[1], -3 * (m.a[0] - m.d[0]) + 2);
        let p = &w.plans[1];
        assert_eq!(
            p.r_value,
            3 * (w.plans[0].l_value + w.plans[0].r_value) - 2 - p.l_value
        );
    }

    #[test]
    fn identity_power_is_degenerate() {
        let w = pwm_witness(&tq41(), &[1], &[0, 0], 1, 6).unwrap();
        let m = &w.witness;
        assert_eq!(m.a[0] - m.d[0], m.a[1] - m.d[1]);
        assert_eq!(m.residuals[0], m.residuals[1]);
    }

    #[test]
    fn all_but_last_is_rejected() {
        let p = TqParams::new(3, 2, vec![0, 1]).unwrap();
        assert!(matches!(
            pwm_witness(&p, &[2], &[0, 0], 1, 4),
            Err(Error::HypothesisUnmet(_))
        ));
    }
}
