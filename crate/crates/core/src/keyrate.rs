//! Asymptotic and finite-size key rates for the tomography-certified
//! protocol and for the CHSH-based DIQKD baseline.

use core::f64::consts::SQRT_2;

#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::adversary::{bob_channel, eve_information_with, HolevoModel};
use crate::error::{check_range, Error, Result};
use crate::quantum::h2;
use crate::tomography::{exact_stats, fidelity_to_identity, MeasurementFrame};

/// Logarithm used in the finite-size correction terms. The entropies
/// themselves are always in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrectionLog {
    #[default]
    Binary,
    /// Base-10 logarithms in the correction terms.
    Decimal,
}

impl CorrectionLog {
    pub fn log(self, x: f64) -> f64 {
        match self {
            CorrectionLog::Binary => x.log2(),
            CorrectionLog::Decimal => x.log10(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteKeyParams {
    /// Key rounds.
    pub n: f64,
    /// Test-round fraction.
    pub gamma: f64,
    pub eps_s: f64,
    pub eps_ec: f64,
    pub eps_ec_prime: f64,
    pub eps_pa: f64,
    pub log: CorrectionLog,
}

impl Default for FiniteKeyParams {
    fn default() -> Self {
        Self {
            n: 1e6,
            gamma: 0.01,
            eps_s: 1e-5,
            eps_ec: 1e-2,
            eps_ec_prime: 1e-2,
            eps_pa: 1e-2,
            log: CorrectionLog::Binary,
        }
    }
}

impl FiniteKeyParams {
    /// Defaults with decimal correction logarithms.
    pub fn decimal() -> Self {
        Self {
            log: CorrectionLog::Decimal,
            ..Self::default()
        }
    }

    pub fn with_n(self, n: f64) -> Self {
        Self { n, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        check_range("n", self.n, 1.0, f64::MAX, "[1, inf)")?;
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::OutOfRange {
                name: "gamma",
                value: self.gamma,
                range: "(0, 1)",
            });
        }
        for (name, e) in [
            ("eps_s", self.eps_s),
            ("eps_ec", self.eps_ec),
            ("eps_ec_prime", self.eps_ec_prime),
            ("eps_pa", self.eps_pa),
        ] {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::OutOfRange {
                    name,
                    value: e,
                    range: "(0, 1]",
                });
            }
        }
        Ok(())
    }

    /// Total rounds `N = n / (1 - gamma)`.
    pub fn total_rounds(&self) -> f64 {
        self.n / (1.0 - self.gamma)
    }

    /// Test rounds `gamma N`.
    pub fn test_rounds(&self) -> f64 {
        self.gamma * self.total_rounds()
    }

    fn sqrt_coefficient(&self) -> f64 {
        let lg = |x| self.log.log(x);
        4.0 * lg(2.0 * SQRT_2 + 1.0)
            * (lg(2.0 / (self.eps_s * self.eps_s)).sqrt() + lg(8.0 / (self.eps_ec_prime * self.eps_ec_prime)).sqrt())
    }

    fn constant_term(&self) -> f64 {
        let lg = |x| self.log.log(x);
        let e = self.eps_ec_prime;
        lg(8.0 / (e * e) + 2.0 / (2.0 - e)) + lg(1.0 / self.eps_ec) + 2.0 * lg(1.0 / (2.0 * self.eps_pa))
    }
}

/// Error-correction leakage split into its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakEc {
    /// `n [(1 - γ) h(Q) + γ h(F)]`
    pub proportional: f64,
    pub sqrt_term: f64,
    pub constant: f64,
}

impl LeakEc {
    pub fn total(&self) -> f64 {
        self.proportional + self.sqrt_term + self.constant
    }
}

pub fn leak_ec(params: &FiniteKeyParams, q: f64, f_expt: f64) -> Result<LeakEc> {
    params.validate()?;
    let lg = |x| params.log.log(x);
    let e = params.eps_ec_prime;
    let n = params.n;
    Ok(LeakEc {
        proportional: n * ((1.0 - params.gamma) * h2(q) + params.gamma * h2(f_expt)),
        sqrt_term: n.sqrt() * 4.0 * lg(2.0 * SQRT_2 + 1.0) * lg(8.0 / (e * e)).sqrt(),
        constant: lg(8.0 / (e * e) + 2.0 / (2.0 - e)) + lg(1.0 / params.eps_ec),
    })
}

/// Per-key-round contributions; `raw = 1 - sum of all fields`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTerms {
    pub key_entropy: f64,
    pub test_entropy: f64,
    pub eve_information: f64,
    pub sqrt_correction: f64,
    pub constant_correction: f64,
}

impl RateTerms {
    pub fn raw(&self) -> f64 {
        1.0 - self.key_entropy
            - self.test_entropy
            - self.eve_information
            - self.sqrt_correction
            - self.constant_correction
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    /// Unclamped bound.
    pub raw: f64,
    /// `max(raw, 0)`
    pub r: f64,
    /// Key length `r n`.
    pub l: f64,
    pub n: f64,
    pub terms: RateTerms,
}

impl RateResult {
    fn from_terms(terms: RateTerms, n: f64) -> Self {
        let raw = terms.raw();
        let r = raw.max(0.0);
        Self {
            raw,
            r,
            l: r * n,
            n,
            terms,
        }
    }
}

/// Where `F_expt` comes from when only `Q` is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FidelityModel {
    /// `1 - 3Q/2`
    #[default]
    BobChannel,
    /// Tomography of Bob's marginal under the attack mixture.
    MixtureTomography,
}

pub fn expected_fidelity(q: f64, model: FidelityModel) -> Result<f64> {
    match model {
        FidelityModel::BobChannel => {
            check_range("QBER", q, 0.0, 0.5, "[0, 1/2]")?;
            Ok(1.0 - 1.5 * q)
        }
        FidelityModel::MixtureTomography => {
            let frame = MeasurementFrame::rotated();
            fidelity_to_identity(&exact_stats(&bob_channel(q)?, &frame)?, &frame)
        }
    }
}

/// `1 - h(Q) - I(A:E)` under the default (average-state) bound.
pub fn asymptotic_rate_ediqkd(q: f64) -> Result<f64> {
    asymptotic_rate_ediqkd_with(q, HolevoModel::default())
}

pub fn asymptotic_rate_ediqkd_with(q: f64, model: HolevoModel) -> Result<f64> {
    Ok(1.0 - h2(q) - eve_information_with(q, model)?)
}

/// `S = 2 sqrt2 (1 - 2Q)`
pub fn chsh_value(q: f64) -> f64 {
    2.0 * SQRT_2 * (1.0 - 2.0 * q)
}

/// Holevo term of the CHSH bound; 1 when `S <= 2`.
pub fn chsh_holevo(s: f64) -> f64 {
    if s <= 2.0 {
        return 1.0;
    }
    let s = s.min(2.0 * SQRT_2);
    h2((1.0 + ((s / 2.0) * (s / 2.0) - 1.0).max(0.0).sqrt()) / 2.0)
}

/// Unclamped `1 - h(Q) - χ(S)`.
pub fn asymptotic_rate_diqkd_raw(q: f64) -> Result<f64> {
    check_range("QBER", q, 0.0, 0.5, "[0, 1/2)")?;
    Ok(1.0 - h2(q) - chsh_holevo(chsh_value(q)))
}

/// `1 - h(Q) - χ(S)` for `S > 2`, otherwise 0.
pub fn asymptotic_rate_diqkd(q: f64) -> Result<f64> {
    if chsh_value(q) <= 2.0 {
        check_range("QBER", q, 0.0, 0.5, "[0, 1/2)")?;
        return Ok(0.0);
    }
    asymptotic_rate_diqkd_raw(q)
}

/// Finite-size rate with the default model.
pub fn finite_rate_ediqkd(q: f64, f_expt: f64, params: &FiniteKeyParams) -> Result<RateResult> {
    finite_rate_ediqkd_with(q, f_expt, params, HolevoModel::default(), None)
}

/// Finite-size rate. `eve` overrides the Eve information term (used with
/// noisy preprocessing).
pub fn finite_rate_ediqkd_with(
    q: f64,
    f_expt: f64,
    params: &FiniteKeyParams,
    holevo: HolevoModel,
    eve: Option<f64>,
) -> Result<RateResult> {
    params.validate()?;
    check_range("F_expt", f_expt, 0.0, 1.0 + 1e-6, "[0, 1]")?;
    let eve_information = match eve {
        Some(e) => e,
        None => eve_information_with(q, holevo)?,
    };
    let n = params.n;
    let terms = RateTerms {
        key_entropy: (1.0 - params.gamma) * h2(q),
        test_entropy: params.gamma * h2(f_expt),
        eve_information,
        sqrt_correction: params.sqrt_coefficient() / n.sqrt(),
        constant_correction: params.constant_term() / n,
    };
    Ok(RateResult::from_terms(terms, n))
}

/// How the DIQKD baseline treats the finite CHSH estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiqkdOptions {
    /// Lower the observed CHSH value by a Hoeffding deviation computed from
    /// the test rounds at confidence `eps_s`.
    pub chsh_penalty: bool,
}

impl Default for DiqkdOptions {
    fn default() -> Self {
        Self { chsh_penalty: true }
    }
}

/// Hoeffding deviation of the CHSH value, `8 sqrt(ln(1/ε_s) / (2 m))` for
/// `m` test rounds.
pub fn chsh_deviation(params: &FiniteKeyParams) -> f64 {
    8.0 * ((1.0 / params.eps_s).ln() / (2.0 * params.test_rounds())).sqrt()
}

pub fn finite_rate_diqkd(q: f64, params: &FiniteKeyParams) -> Result<RateResult> {
    finite_rate_diqkd_with(q, params, DiqkdOptions::default())
}

pub fn finite_rate_diqkd_with(q: f64, params: &FiniteKeyParams, opts: DiqkdOptions) -> Result<RateResult> {
    finite_rate_diqkd_observed(q, chsh_value(q), params, opts)
}

/// DIQKD rate from a QBER and a CHSH value observed independently.
pub fn finite_rate_diqkd_observed(q: f64, s: f64, params: &FiniteKeyParams, opts: DiqkdOptions) -> Result<RateResult> {
    params.validate()?;
    check_range("QBER", q, 0.0, 0.5, "[0, 1/2)")?;
    check_range(
        "CHSH value",
        s,
        -2.0 * SQRT_2 - 1e-9,
        2.0 * SQRT_2 + 1e-9,
        "[-2 sqrt2, 2 sqrt2]",
    )?;
    let s = s.abs().min(2.0 * SQRT_2);
    let win = (1.0 + s / (2.0 * SQRT_2)) / 2.0;
    let s_est = if opts.chsh_penalty {
        s - chsh_deviation(params)
    } else {
        s
    };
    let n = params.n;
    let terms = RateTerms {
        key_entropy: (1.0 - params.gamma) * h2(q),
        test_entropy: params.gamma * h2(win),
        eve_information: chsh_holevo(s_est),
        sqrt_correction: params.sqrt_coefficient() / n.sqrt(),
        constant_correction: params.constant_term() / n,
    };
    Ok(RateResult::from_terms(terms, n))
}

/// Bisection for the zero of an unclamped rate on `[lo, hi]`, where the
/// rate is positive at `lo` and negative at `hi`.
pub fn critical_qber(rate: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    if rate(a)? <= 0.0 || rate(b)? > 0.0 {
        return Err(Error::NoSolution("rate does not change sign on the interval"));
    }
    while b - a > 1e-10 {
        let m = 0.5 * (a + b);
        if rate(m)? > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelCritical {
    pub model: HolevoModel,
    pub critical_qber: f64,
}

/// Zero crossing of the asymptotic rate under each Holevo model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSelection {
    pub entries: [ModelCritical; 3],
    /// Model whose crossing lies closest to the target.
    pub selected: HolevoModel,
}

pub fn holevo_model_selection(target: f64) -> Result<ModelSelection> {
    let mut entries = [ModelCritical {
        model: HolevoModel::default(),
        critical_qber: 0.0,
    }; 3];
    for (e, model) in entries.iter_mut().zip(HolevoModel::ALL) {
        let q = critical_qber(
            |q| asymptotic_rate_ediqkd_with(q, model),
            1e-4,
            model.max_qber() - 1e-12,
        )?;
        *e = ModelCritical {
            model,
            critical_qber: q,
        };
    }
    let selected = entries
        .iter()
        .min_by(|a, b| {
            (a.critical_qber - target)
                .abs()
                .total_cmp(&(b.critical_qber - target).abs())
        })
        .map(|e| e.model)
        .unwrap_or_default();
    Ok(ModelSelection { entries, selected })
}

pub const DEFAULT_TARGET_RATE: f64 = 1e-3;
const LOG_N_MAX: f64 = 20.0;
const GRID_STEP: f64 = 0.01;

/// Smallest `n` with `rate(n) >= target`: first hit on a `10^0.01` grid
/// over `[1, 1e20]`, refined by bisection in `log10 n`.
pub fn min_key_rounds(rate: impl Fn(f64) -> Result<f64>, target: f64) -> Result<f64> {
    let at = |x: f64| rate(10f64.powf(x));
    let steps = (LOG_N_MAX / GRID_STEP).round() as usize;
    let mut prev = 0.0;
    for k in 0..=steps {
        let x = k as f64 * GRID_STEP;
        if at(x)? >= target {
            if k == 0 {
                return Ok(1.0);
            }
            let (mut lo, mut hi) = (prev, x);
            while hi - lo > 1e-7 {
                let m = 0.5 * (lo + hi);
                if at(m)? >= target {
                    hi = m;
                } else {
                    lo = m;
                }
            }
            return Ok(10f64.powf(hi));
        }
        prev = x;
    }
    Err(Error::NoSolution("target rate not reached for n <= 1e20"))
}

pub fn min_key_rounds_ediqkd(q: f64, params: &FiniteKeyParams, target: f64) -> Result<f64> {
    let f = expected_fidelity(q, FidelityModel::default())?;
    let eve = eve_information_with(q, HolevoModel::default())?;
    min_key_rounds(
        |n| finite_rate_ediqkd_with(q, f, &params.with_n(n), HolevoModel::default(), Some(eve)).map(|r| r.raw),
        target,
    )
}

pub fn min_key_rounds_diqkd(q: f64, params: &FiniteKeyParams, target: f64) -> Result<f64> {
    min_key_rounds(|n| finite_rate_diqkd(q, &params.with_n(n)).map(|r| r.raw), target)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyFactor {
    pub n_ediqkd: f64,
    pub n_diqkd: f64,
}

impl EfficiencyFactor {
    /// `n'_DIQKD / n'_EDIQKD`
    pub fn ratio(&self) -> f64 {
        self.n_diqkd / self.n_ediqkd
    }
}

pub fn efficiency_factor(q: f64, params: &FiniteKeyParams) -> Result<EfficiencyFactor> {
    Ok(EfficiencyFactor {
        n_ediqkd: min_key_rounds_ediqkd(q, params, DEFAULT_TARGET_RATE)?,
        n_diqkd: min_key_rounds_diqkd(q, params, DEFAULT_TARGET_RATE)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ediqkd_raw(q: f64) -> Result<f64> {
        asymptotic_rate_ediqkd(q)
    }

    #[test]
    fn asymptotic_edges() {
        assert!((asymptotic_rate_ediqkd(0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((asymptotic_rate_diqkd(0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(asymptotic_rate_diqkd(0.05).unwrap() > 0.0);
        assert_eq!(asymptotic_rate_diqkd(0.2).unwrap(), 0.0);
    }

    #[test]
    fn model_selection_picks_average_state() {
        let sel = holevo_model_selection(0.069).unwrap();
        assert_eq!(sel.selected, HolevoModel::AverageStateBound);
        assert!(sel.entries.iter().all(|e| e.critical_qber > 0.05));
    }

    #[test]
    fn critical_values() {
        let e = critical_qber(ediqkd_raw, 1e-4, 1.0 / 6.0).unwrap();
        assert!((e - 0.0684).abs() < 5e-4, "{e}");
        let d = critical_qber(asymptotic_rate_diqkd_raw, 1e-4, 0.14).unwrap();
        assert!((d - 0.07149).abs() < 5e-4, "{d}");
        let n = critical_qber(
            |q| asymptotic_rate_ediqkd_with(q, HolevoModel::NumericMixture),
            1e-4,
            1.0 / 6.0,
        )
        .unwrap();
        assert!((n - 0.1487).abs() < 1e-3, "{n}");
        let c = critical_qber(
            |q| asymptotic_rate_ediqkd_with(q, HolevoModel::ClosedForm),
            1e-4,
            1.0 / 6.0,
        )
        .unwrap();
        assert!((c - 0.126).abs() < 1e-3, "{c}");
    }

    #[test]
    fn ediqkd_rate_decreasing() {
        let mut prev = f64::INFINITY;
        for k in 0..=69 {
            let r = asymptotic_rate_ediqkd(k as f64 / 1000.0).unwrap();
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn leak_ec_scaling_and_split() {
        let p = FiniteKeyParams::default();
        let a = leak_ec(&p, 0.025, 0.9625).unwrap();
        let b = leak_ec(&p.with_n(4.0 * p.n), 0.025, 0.9625).unwrap();
        assert!((b.sqrt_term / a.sqrt_term - 2.0).abs() < 1e-12);
        assert!((b.proportional / a.proportional - 4.0).abs() < 1e-12);
        // independent evaluation of the same expression
        let l2 = f64::log2;
        let want = 1e6 * (0.99 * h2(0.025) + 0.01 * h2(0.9625))
            + 1e3 * 4.0 * l2(2.0 * 2f64.sqrt() + 1.0) * l2(8.0 / 1e-4).sqrt()
            + l2(8.0 / 1e-4 + 2.0 / 1.99)
            + l2(100.0);
        assert!((a.total() - want).abs() < 1e-6 * want);
        let degenerate = FiniteKeyParams { eps_ec_prime: 1.0, ..p };
        assert!(leak_ec(&degenerate, 0.025, 0.9625).unwrap().total().is_finite());
    }

    #[test]
    fn breakdown_is_exact() {
        let r = finite_rate_ediqkd(0.03, 0.955, &FiniteKeyParams::default()).unwrap();
        let t = r.terms;
        let sum = 1.0 - t.key_entropy - t.test_entropy - t.eve_information - t.sqrt_correction - t.constant_correction;
        assert!((sum - r.raw).abs() < 1e-12);
        assert!((r.l - r.r * r.n).abs() < 1e-9);
    }

    #[test]
    fn large_n_approaches_asymptote() {
        let p = FiniteKeyParams::default().with_n(1e15);
        let q = 0.0684;
        let r = finite_rate_ediqkd(q, 1.0 - 1.5 * q, &p).unwrap();
        assert!(r.raw.abs() < 5e-3, "{}", r.raw);
        let d = finite_rate_diqkd(0.03, &p).unwrap();
        assert!((d.raw - asymptotic_rate_diqkd(0.03).unwrap()).abs() < 1e-3);
    }

    #[test]
    fn decimal_round_counts() {
        // minimum key rounds for r >= 0.001 (log10), within 0.3
        let p = FiniteKeyParams::decimal();
        for (q, le, ld) in [
            (0.055, 3.77, 6.23),
            (0.06, 4.18, 6.56),
            (0.065, 5.06, 7.10),
            (0.066, 5.31, 7.26),
            (0.067, 6.14, 7.45),
        ] {
            let e = efficiency_factor(q, &p).unwrap();
            assert!((e.n_ediqkd.log10() - le).abs() <= 0.3, "E {q}: {}", e.n_ediqkd.log10());
            assert!((e.n_diqkd.log10() - ld).abs() <= 0.3, "D {q}: {}", e.n_diqkd.log10());
        }
    }

    #[test]
    fn efficiency_factor_exceeds_one() {
        let p = FiniteKeyParams::decimal();
        for q in [0.01, 0.03, 0.05, 0.065] {
            assert!(efficiency_factor(q, &p).unwrap().ratio() > 1.0);
        }
    }

    #[test]
    fn unreachable_target() {
        let p = FiniteKeyParams::decimal();
        assert!(matches!(
            min_key_rounds_ediqkd(0.1, &p, 1e-3),
            Err(Error::NoSolution(_))
        ));
    }

    #[test]
    fn mixture_fidelity_matches_channel_value() {
        for q in [0.0, 0.05, 0.1] {
            let a = expected_fidelity(q, FidelityModel::BobChannel).unwrap();
            let b = expected_fidelity(q, FidelityModel::MixtureTomography).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn finite_rates_monotone_in_n(q in 0.0f64..0.07, a in 1.0f64..15.0, b in 1.0f64..15.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let p = FiniteKeyParams::default();
            let f = 1.0 - 1.5 * q;
            let e_lo = finite_rate_ediqkd(q, f, &p.with_n(10f64.powf(lo))).unwrap().raw;
            let e_hi = finite_rate_ediqkd(q, f, &p.with_n(10f64.powf(hi))).unwrap().raw;
            prop_assert!(e_lo <= e_hi + 1e-12);
            let d_lo = finite_rate_diqkd(q, &p.with_n(10f64.powf(lo))).unwrap().raw;
            let d_hi = finite_rate_diqkd(q, &p.with_n(10f64.powf(hi))).unwrap().raw;
            prop_assert!(d_lo <= d_hi + 1e-12);
            prop_assert!(e_hi < asymptotic_rate_ediqkd(q).unwrap());
        }

        #[test]
        fn finite_rate_nondecreasing_in_eps(e1 in 1e-6f64..0.5, e2 in 1e-6f64..0.5, which in 0usize..4) {
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let set = |e: f64| {
                let mut p = FiniteKeyParams::default();
                match which {
                    0 => p.eps_s = e,
                    1 => p.eps_ec = e,
                    2 => p.eps_ec_prime = e,
                    _ => p.eps_pa = e,
                }
                p
            };
            let r = |p: FiniteKeyParams| finite_rate_ediqkd(0.03, 0.955, &p).unwrap().raw;
            prop_assert!(r(set(lo)) <= r(set(hi)) + 1e-12);
        }

        #[test]
        fn rates_bounded_by_one(q in 0.0f64..0.16) {
            prop_assert!(asymptotic_rate_ediqkd(q).unwrap() <= 1.0);
            prop_assert!(asymptotic_rate_diqkd(q).unwrap() <= 1.0);
            if q > 0.0 {
                prop_assert!(asymptotic_rate_ediqkd(q).unwrap() < 1.0);
            }
        }
    }
}
