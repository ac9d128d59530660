//! Randomized invariant suites with per-trial residual maxima and
//! reproducible counterexample witnesses.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::conelab::{
    bk_check, boundary_cone, central_orthogonal_space, central_sa_maximal, direct_cone_membership,
    orderable_probe, OrderedSpace,
};
use crate::error::{Error, Result};
use crate::instance::{
    peirce_pieces, random_cone_element, random_element, random_subtripotent, random_tripotent,
    random_tro,
};
use crate::linalg::{eigh_unchecked, is_psd_lenient, psd_part, range_projection, CMatrix, TolerancePolicy, C64};
use crate::peirce::{
    abs_of, block_bounds_check, hat_element, range_tripotent, spectral_tripotent, PeirceAlgebra,
};
use crate::rng::SplitMix64;
use crate::subspace::Subspace;
use crate::tripotent::{
    amplify, inf_commuting, inf_family, leq, order_criteria, sup, sup_commuting, sup_exists,
    sup_minimality_probe, InfFamilyOptions, Tripotent,
};
use crate::tro::{theta, TroSpace};

/// Suite names with their default trial counts, in run order.
pub const SUITES: [(&str, usize); 9] = [
    ("order-equiv", 500),
    ("sup-inf", 500),
    ("cone-lemmas", 500),
    ("hat-lemmas", 500),
    ("block-bounds", 300),
    ("peirce-cstar", 300),
    ("quotient-positivity", 200),
    ("boundary-cone", 200),
    ("annihilator-maximal", 200),
];

/// Samples per property per trial in the cone suites.
pub const SAMPLES_PER_TRIAL: usize = 200;
/// Sampled candidate upper bounds per trial when probing minimality of a supremum.
pub const SUP_PROBE_SAMPLES: usize = 1000;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// A name from [`SUITES`] or `"all"`.
    pub suite: String,
    /// Trials per suite; `None` uses each suite's default.
    pub trials: Option<usize>,
    pub dim_max: usize,
    pub seed: u64,
    pub tol: TolerancePolicy,
}

impl SuiteConfig {
    pub fn new(suite: impl Into<String>) -> Self {
        Self {
            suite: suite.into(),
            trials: None,
            dim_max: 4,
            seed: 0,
            tol: TolerancePolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.suite != "all" && default_trials(&self.suite).is_none() {
            return Err(Error::UnknownSuite(self.suite.clone()));
        }
        if self.trials == Some(0) {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        if !(1..=8).contains(&self.dim_max) {
            return Err(Error::InvalidInput("dim_max must lie in 1..=8".into()));
        }
        self.tol.validate(2 * self.dim_max)
    }
}

pub fn default_trials(suite: &str) -> Option<usize> {
    SUITES.iter().find(|(name, _)| *name == suite).map(|(_, n)| *n)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub messages: Vec<String>,
    /// Inputs of the failing trial, enough to replay it.
    pub witness: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub seed: u64,
    pub dim_max: usize,
    /// Largest value of each tracked residual over all trials.
    pub max_residuals: BTreeMap<String, f64>,
    pub failures: Vec<TrialFailure>,
    pub elapsed_seconds: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub suites: Vec<SuiteReport>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

/// Bookkeeping for one trial: residuals against limits, boolean checks and
/// the witness dumped on failure.
#[derive(Default)]
pub struct Trial {
    residuals: BTreeMap<String, f64>,
    failures: Vec<String>,
    witness: Value,
}

impl Trial {
    /// Tracks `value` under `name` and fails the trial if it exceeds `limit`.
    pub fn record(&mut self, name: &str, value: f64, limit: f64) {
        let slot = self.residuals.entry(name.to_string()).or_insert(0.0);
        if value.is_nan() || value > *slot {
            *slot = value;
        }
        if value.is_nan() || value > limit {
            self.failures
                .push(format!("{name} = {value:.3e} exceeds {limit:.1e}"));
        }
    }

    pub fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(message());
        }
    }

    pub fn witness(&mut self, key: &str, value: impl Serialize) {
        if !self.witness.is_object() {
            self.witness = json!({});
        }
        self.witness[key] = serde_json::to_value(value).unwrap_or(Value::Null);
    }
}

type TrialFn = fn(&mut Trial, &mut SplitMix64, usize, &TolerancePolicy) -> Result<()>;

fn trial_fn(suite: &str) -> Option<TrialFn> {
    Some(match suite {
        "order-equiv" => order_equiv,
        "sup-inf" => sup_inf,
        "cone-lemmas" => cone_lemmas,
        "hat-lemmas" => hat_lemmas,
        "block-bounds" => block_bounds,
        "peirce-cstar" => peirce_cstar,
        "quotient-positivity" => quotient_positivity,
        "boundary-cone" => boundary_cone_suite,
        "annihilator-maximal" => annihilator_maximal,
        _ => return None,
    })
}

/// Runs the named suite, or every suite for `"all"`.
pub fn verify(config: &SuiteConfig) -> Result<SuiteReport> {
    config.validate()?;
    if config.suite != "all" {
        return Ok(run_suite(config, &config.suite));
    }
    let start = Instant::now();
    let parts: Vec<SuiteReport> = SUITES
        .iter()
        .map(|(name, _)| run_suite(config, name))
        .collect();
    let mut max_residuals = BTreeMap::new();
    for part in &parts {
        for (k, v) in &part.max_residuals {
            max_residuals.insert(format!("{}/{k}", part.suite), *v);
        }
    }
    Ok(SuiteReport {
        suite: "all".into(),
        trials: parts.iter().map(|p| p.trials).sum(),
        passed: parts.iter().map(|p| p.passed).sum(),
        failed: parts.iter().map(|p| p.failed).sum(),
        seed: config.seed,
        dim_max: config.dim_max,
        max_residuals,
        failures: vec![],
        elapsed_seconds: start.elapsed().as_secs_f64(),
        suites: parts,
    })
}

fn suite_seed(seed: u64, suite: &str) -> u64 {
    suite
        .bytes()
        .fold(seed ^ 0xCBF2_9CE4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01B3))
}

fn run_suite(config: &SuiteConfig, suite: &str) -> SuiteReport {
    let start = Instant::now();
    let f = trial_fn(suite).expect("suite name validated");
    let trials = config.trials.or(default_trials(suite)).unwrap_or(1);
    let seed = suite_seed(config.seed, suite);
    let outcomes: Vec<(usize, Trial)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = SplitMix64::for_trial(seed, i as u64);
            let mut t = Trial::default();
            if let Err(e) = f(&mut t, &mut rng, config.dim_max, &config.tol) {
                t.failures.push(format!("error: {e}"));
            }
            (i, t)
        })
        .collect();
    merge(suite, config, outcomes, start)
}

fn merge(suite: &str, config: &SuiteConfig, outcomes: Vec<(usize, Trial)>, start: Instant) -> SuiteReport {
    let mut max_residuals: BTreeMap<String, f64> = BTreeMap::new();
    let mut failures = Vec::new();
    let trials = outcomes.len();
    for (i, t) in outcomes {
        for (k, v) in t.residuals {
            let slot = max_residuals.entry(k).or_insert(0.0);
            if v.is_nan() || v > *slot {
                *slot = v;
            }
        }
        if !t.failures.is_empty() {
            let mut witness = t.witness;
            if !witness.is_object() {
                witness = json!({});
            }
            witness["replay"] = json!({"suite": suite, "seed": config.seed, "trial": i, "dim_max": config.dim_max});
            failures.push(TrialFailure {
                trial: i,
                messages: t.failures,
                witness,
            });
        }
    }
    let failed = failures.len();
    SuiteReport {
        suite: suite.to_string(),
        trials,
        passed: trials - failed,
        failed,
        seed: config.seed,
        dim_max: config.dim_max,
        max_residuals,
        failures,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        suites: vec![],
    }
}

/// A claimed order relation `a ≤ b` in `space`, replayed through the
/// order-equivalence checks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrderFixture {
    pub space: TroSpace,
    pub a: CMatrix,
    pub b: CMatrix,
}

/// Runs the order-equivalence checks on one fixture as a one-trial report.
pub fn verify_fixture(fixture: &OrderFixture, tol: &TolerancePolicy) -> SuiteReport {
    let start = Instant::now();
    let mut t = Trial::default();
    t.witness("fixture", fixture);
    let space = Arc::new(fixture.space.clone());
    let run = |t: &mut Trial| -> Result<()> {
        let a = Tripotent::new(space.clone(), &fixture.a, tol)?;
        let b = Tripotent::new(space.clone(), &fixture.b, tol)?;
        check_ordered_pair(t, &a, &b, tol)
    };
    if let Err(e) = run(&mut t) {
        t.failures.push(format!("error: {e}"));
    }
    let config = SuiteConfig {
        suite: "order-equiv".into(),
        trials: Some(1),
        dim_max: fixture.space.p().max(fixture.space.q()),
        seed: 0,
        tol: *tol,
    };
    merge("order-equiv", &config, vec![(0, t)], start)
}

fn random_space(
    rng: &mut SplitMix64,
    dim_max: usize,
    square: bool,
    tol: &TolerancePolicy,
) -> Result<Arc<TroSpace>> {
    let star = square && rng.coin();
    let p = rng.range_inclusive(1, dim_max);
    let q = if square { p } else { rng.range_inclusive(1, dim_max) };
    Ok(Arc::new(random_tro(p, q, star, rng, tol)?))
}

fn min_eig(h: &CMatrix) -> f64 {
    eigh_unchecked(&h.hermitian_part())
        .values
        .last()
        .copied()
        .unwrap_or(0.0)
}

fn check_ordered_pair(t: &mut Trial, a: &Tripotent, b: &Tripotent, tol: &TolerancePolicy) -> Result<()> {
    let oc = order_criteria(a, b, tol)?;
    t.check(oc.verdicts.iter().all(|&v| v), || {
        format!("a ≤ b by construction but criteria gave {:?} (residuals {:?})", oc.verdicts, oc.residuals)
    });
    t.record("order_residual", oc.residuals.iter().copied().fold(0.0, f64::max), 1e-8);
    let left = &b.left() - &a.left();
    let right = &b.right() - &a.right();
    t.record("support_psd_slack", (-min_eig(&left)).max(-min_eig(&right)).max(0.0), 1e-9);
    Ok(())
}

fn order_equiv(t: &mut Trial, rng: &mut SplitMix64, dim_max: usize, tol: &TolerancePolicy) -> Result<()> {
    let z = random_space(rng, dim_max, false, tol)?;
    let b = random_tripotent(&z, rng, tol)?;
    let a = random_subtripotent(&b, rng, tol)?;
    let c = random_tripotent(&z, rng, tol)?;
    t.witness("space", &*z);
    t.witness("a", a.matrix());
    t.witness("b", b.matrix());
    t.witness("c", c.matrix());
    check_ordered_pair(t, &a, &b, tol)?;
    for (x, y) in [(&c, &b), (&b, &c), (&b, &a)] {
        let oc = order_criteria(x, y, tol)?;
        t.check(oc.agree(), || {
            format!("criteria disagree on an unrelated pair: {:?} (residuals {:?})", oc.verdicts, oc.residuals)
        });
    }
    let p = z.p();
    t.record("breve_is_theta_hat", (&a.breve() - &theta(&a.hat(), p)).frob_norm(), 1e-8);
    t.record("hat_of_negative", (&a.neg().hat() - &a.breve()).frob_norm(), 1e-8);
    if z.dim() <= 12 {
        let (a2, b2) = (amplify(&a, 2, tol)?, amplify(&b, 2, tol)?);
        t.check(leq(&a2, &b2, tol)?, || "amplification does not preserve a ≤ b".into());
    }
    Ok(())
}

/// Commuting pair `a = Σ_{S₁} s_k w e_k`, `b = Σ_{S₂} s'_k w e_k` built from
/// orthogonal pieces of one tripotent, with the exact supremum (when it
/// exists) and infimum.
struct CommutingPair {
    a: Tripotent,
    b: Tripotent,
    sup: Option<CMatrix>,
    inf: CMatrix,
}

fn commuting_pair(z: &Arc<TroSpace>, rng: &mut SplitMix64, tol: &TolerancePolicy) -> Result<CommutingPair> {
    let w = random_tripotent(z, rng, tol)?;
    let pieces: Vec<CMatrix> = peirce_pieces(&w, rng, tol)
        .iter()
        .map(|e| w.matrix() * e)
        .collect();
    let (p, q) = (z.p(), z.q());
    let (mut a, mut b) = (CMatrix::zeros(p, q), CMatrix::zeros(p, q));
    let (mut s, mut i) = (CMatrix::zeros(p, q), CMatrix::zeros(p, q));
    let mut sup_ok = true;
    for piece in &pieces {
        let in_a = rng.coin();
        let in_b = rng.coin();
        let sa = if rng.next_f64() < 0.2 { -1.0 } else { 1.0 };
        let sb = if rng.next_f64() < 0.2 { -1.0 } else { 1.0 };
        if in_a {
            a += &piece.scale(sa);
        }
        if in_b {
            b += &piece.scale(sb);
        }
        match (in_a, in_b) {
            (true, true) if sa == sb => {
                s += &piece.scale(sa);
                i += &piece.scale(sa);
            }
            (true, true) => sup_ok = false,
            (true, false) => s += &piece.scale(sa),
            (false, true) => s += &piece.scale(sb),
            (false, false) => {}
        }
    }
    Ok(CommutingPair {
        a: Tripotent::new(z.clone(), &a, tol)?,
        b: Tripotent::new(z.clone(), &b, tol)?,
        sup: sup_ok.then_some(s),
        inf: i,
    })
}

fn sup_inf(t: &mut Trial, rng: &mut SplitMix64, dim_max: usize, tol: &TolerancePolicy) -> Result<()> {
    let scalar = Arc::new(TroSpace::full(1, 1));
    let theta_angle = rng.uniform(0.0, std::f64::consts::TAU);
    let phase = CMatrix::from_row_major(1, 1, &[C64::from_polar(1.0, theta_angle)])?;
    let u = Tripotent::new(scalar, &phase, tol)?;
    t.check(!sup_exists(&u, &u.neg(), tol)?, || "sup of u and −u in ℂ was accepted".into());

    let z = random_space(rng, dim_max, false, tol)?;
    let pair = commuting_pair(&z, rng, tol)?;
    t.witness("space", &*z);
    t.witness("a", pair.a.matrix());
    t.witness("b", pair.b.matrix());
    let (a, b) = (&pair.a, &pair.b);

    let exists = sup_exists(a, b, tol)?;
    t.check(exists == pair.sup.is_some(), || {
        format!("sup_exists returned {exists} against the piecewise oracle")
    });
    if let (true, Some(expected)) = (exists, &pair.sup) {
        let w = sup(a, b, tol)?;
        t.record("sup_vs_oracle", (w.matrix() - expected).frob_norm(), 1e-8);
        t.record("sup_dominates", a.order_residual(&w).max(b.order_residual(&w)), 1e-8);
        let probe = sup_minimality_probe(a, b, &w, SUP_PROBE_SAMPLES, rng, tol)?;
        t.record("sup_probe_dominating_seen", probe.dominating as f64, f64::INFINITY);
        let wc = sup_commuting(a, b, tol)?;
        t.record("sup_commuting_vs_sup", (wc.matrix() - w.matrix()).frob_norm(), 1e-8);
        if z.dim() <= 8 {
            let amp = sup_commuting(&amplify(a, 2, tol)?, &amplify(b, 2, tol)?, tol)?;
            let expect = amplify(&w, 2, tol)?;
            t.record("sup_amplified", (amp.matrix() - expect.matrix()).frob_norm(), 1e-8);
        }
    }

    let i = inf_commuting(a, b, tol)?;
    let m = i.matrix();
    t.record("inf_tripotent", (&(&(m * &m.adjoint()) * m) - m).frob_norm(), 1e-8);
    t.record("inf_vs_oracle", (m - &pair.inf).frob_norm(), 1e-8);
    t.record("inf_below", i.order_residual(a).max(i.order_residual(b)), 1e-8);
    if z.dim() <= 8 {
        let amp = inf_commuting(&amplify(a, 2, tol)?, &amplify(b, 2, tol)?, tol)?;
        let expect = CMatrix::identity(2).kron(m);
        t.record("inf_amplified", (amp.matrix() - &expect).frob_norm(), 1e-8);
    }

    if rng.below(10) == 0 {
        let opts = InfFamilyOptions {
            seed: rng.next_u64(),
            ..InfFamilyOptions::default()
        };
        let f = inf_family(&[a.clone(), b.clone()], opts, tol)?;
        t.record("inf_family_vs_formula", (f.matrix() - m).frob_norm(), 1e-6);
        let mut mismatches = 0;
        for k in 0..SAMPLES_PER_TRIAL {
            let x = match k % 3 {
                0 => random_cone_element(&f, rng, tol),
                1 => random_cone_element(a, rng, tol),
                _ => random_cone_element(b, rng, tol),
            };
            let both = direct_cone_membership(a, &x, tol) && direct_cone_membership(b, &x, tol);
            if both != direct_cone_membership(&f, &x, tol) {
                mismatches += 1;
            }
        }
        t.record("inf_family_cone_mismatches", mismatches as f64, 0.0);
    }

    let c = random_tripotent(&z, rng, tol)?;
    let d = random_tripotent(&z, rng, tol)?;
    if sup_exists(&c, &d, tol)? {
        let w = sup(&c, &d, tol)?;
        t.record("sup_dominates", c.order_residual(&w).max(d.order_residual(&w)), 1e-8);
        sup_minimality_probe(&c, &d, &w, SUP_PROBE_SAMPLES / 10, rng, tol)?;
    }
    Ok(())
}

/// Smallest inner ideal containing `x`: span closure under `(a, c) ↦ a z* c`.
fn generated_inner_ideal(z: &TroSpace, x: &CMatrix, tol: &TolerancePolicy) -> Subspace {
    let mut j = Subspace::span(z.p(), z.q(), std::slice::from_ref(x), tol);
    loop {
        let mut products = j.basis().to_vec();
        for a in j.basis() {
            for c in j.basis() {
                for b in z.basis() {
                    products.push(&(a * &b.adjoint()) * c);
                }
            }
        }
        let next = Subspace::span(z.p(), z.q(), &products, tol);
        if next.dim() == j.dim() {
            return next;
        }
        j = next;
    }
}

fn cone_lemmas(t: &mut Trial, rng: &mut SplitMix64, dim_max: usize, tol: &TolerancePolicy) -> Result<()> {
    let z = random_space(rng, dim_max, true, tol)?;
    t.witness("space", &*z);
    let half = SAMPLES_PER_TRIAL / 2;

    let cone = z.natural_cone(tol)?;
    let j = cone.j();
    let mut cruc_mismatch = 0;
    for k in 0..SAMPLES_PER_TRIAL {
        let y = random_element(j.subspace(), rng);
        let x = if k < half {
            if k % 2 == 0 {
                &y.adjoint() * &y
            } else {
                psd_part(&y.hermitian_part())
            }
        } else {
            match k % 3 {
                0 => random_element(z.subspace(), rng),
                1 => -(&y.adjoint() * &y),
                _ => y.hermitian_part(),
            }
        };
        let oracle = z.contains(&x, tol)? && is_psd_lenient(&x.hermitian_part(), tol) && x.hermitian_defect() <= tol.eq_tol * x.frob_norm().max(1.0);
        if cone.contains(&x, tol)? != oracle {
            cruc_mismatch += 1;
        }
    }
    t.record("natural_cone_mismatches", cruc_mismatch as f64, 0.0);

    let u = random_tripotent(&z, rng, tol)?;
    let sub = random_subtripotent(&u, rng, tol)?;
    let other = random_tripotent(&z, rng, tol)?;
    t.witness("u", u.matrix());
    let pa = PeirceAlgebra::build(&u, None, tol)?;
    let (mut toadd_mismatch, mut members_rejected) = (0, 0);
    for k in 0..SAMPLES_PER_TRIAL {
        let x = if k < half {
            if k % 2 == 0 {
                random_cone_element(&u, rng, tol)
            } else {
                random_cone_element(&sub, rng, tol)
            }
        } else if k % 2 == 0 {
            random_element(z.subspace(), rng)
        } else {
            random_cone_element(&other, rng, tol)
        };
        let member = pa.cone_membership(&x, tol)?;
        if k < half {
            if !member {
                members_rejected += 1;
            }
            let scale = x.frob_norm().max(1.0);
            t.record("abs_identity", (&(&u.matrix().adjoint() * &x) - &abs_of(&x, tol)).frob_norm() / scale, 1e-8);
            let r = range_tripotent(&z, &x, tol)?;
            let support = range_projection(&(&u.matrix().adjoint() * &x).hermitian_part(), tol);
            t.record("range_is_support", (r.matrix() - &(u.matrix() * &support)).frob_norm(), 1e-8);
        }
        if x.frob_norm() > 1e-12 {
            let r = range_tripotent(&z, &x, tol)?;
            if member != leq(&r, &u, tol)? {
                toadd_mismatch += 1;
            }
        }
    }
    t.record("cone_members_rejected", members_rejected as f64, 0.0);
    t.record("cone_vs_range_order_mismatches", toadd_mismatch as f64, 0.0);

    let x = random_element(z.subspace(), rng);
    let r = range_tripotent(&z, &x, tol)?;
    let ideal = generated_inner_ideal(&z, &x, tol);
    let two = r.peirce2_space(tol);
    let gap = if two.same_span(&ideal, tol) { 0.0 } else { 1.0 };
    t.record("peirce_space_is_generated_inner_ideal", gap, 0.0);
    Ok(())
}

fn hat_lemmas(t: &mut Trial, rng: &mut SplitMix64, dim_max: usize, tol: &TolerancePolicy) -> Result<()> {
    let z = random_space(rng, dim_max, false, tol)?;
    let x = if rng.coin() {
        let y = random_element(z.subspace(), rng);
        let n = y.spectral_norm();
        if n > 0.0 {
            y.scale(rng.uniform(0.2, 1.0) / n)
        } else {
            y
        }
    } else {
        let w = random_tripotent(&z, rng, tol)?;
        let y = random_element(&w.peirce0_space(tol), rng);
        let n = y.spectral_norm();
        if n > 1e-12 {
            w.matrix() + &y.scale(rng.uniform(0.1, 0.95) / n)
        } else {
            w.matrix().clone()
        }
    };
    t.witness("space", &*z);
    t.witness("x", &x);
    let h = hat_element(&z, &x, tol)?;
    t.record("hat_negative_eigenvalue", (-h.min_eigenvalue).max(0.0), 1e-10);
    t.record("hat_norm_excess", (h.norm - 1.0).max(0.0), 1e-9);
    t.record("hat_limit_residual", h.limit_residual, 1e-8);
    t.record("hat_range_residual", h.range_residual, 1e-8);
    t.record("hat_below_range", h.below_range_hat, 1e-9);
    Ok(())
}

fn block_bounds(t: &mut Trial, rng: &mut SplitMix64, _dim_max: usize, tol: &TolerancePolicy) -> Result<()> {
    let a = Arc::new(random_tro(4, 4, true, rng, tol)?);
    let n = 2;
    let mut y = CMatrix::zeros(8, 8);
    for i in 0..n {
        for j in 0..n {
            y.set_block(4 * i, 4 * j, &random_element(a.subspace(), rng));
        }
    }
    let mut x = &y.adjoint() * &y;
    let norm = x.spectral_norm();
    if norm > 0.0 {
        let scale = if rng.coin() { 1.0 } else { rng.uniform(0.3, 0.99) };
        x = x.scale(scale / norm).hermitian_part();
    }
    t.witness("algebra", &*a);
    t.witness("x", &x);
    let opts = InfFamilyOptions {
        seed: rng.next_u64(),
        ..InfFamilyOptions::default()
    };
    let report = block_bounds_check(&a, &x, n, opts, tol)?;
    t.check(report.verdict == Some(true), || "block bound chain fails".into());
    for name in ["inf_below_limit", "limit_below_x", "x_below_range", "range_below_sup"] {
        t.record(name, report.residuals.get(name).copied().unwrap_or(f64::NAN), 1e-9);
    }
    t.record("inf_cross_check", report.residuals["inf_cross_check"], 1e-8);
    Ok(())
}

fn peirce_cstar(t: &mut Trial, rng: &mut SplitMix64, dim_max: usize, tol: &TolerancePolicy) -> Result<()> {
    let z = random_space(rng, dim_max, false, tol)?;
    let u = random_tripotent(&z, rng, tol)?;
    t.witness("space", &*z);
    t.witness("u", u.matrix());
    let pa = PeirceAlgebra::build(&u, Some(&z), tol)?;
    let r = pa.axiom_residuals();
    t.record("product_closure", r.product_closure, 1e-8);
    t.record("involution_closure", r.involution_closure, 1e-8);
    t.record("involution_period", r.involution_period, 1e-8);
    t.record("anti_multiplicative", r.anti_multiplicative, 1e-8);
    t.record("unit", r.unit, 1e-8);
    t.record("associativity", r.associativity, 1e-8);
    t.record("iso_product", r.iso_product, 1e-8);
    t.record("iso_involution", r.iso_involution, 1e-8);
    t.record("cstar_norm", r.cstar_norm, 1e-8);
    Ok(())
}

fn conjugate(basis: &[CMatrix], w: &CMatrix) -> Vec<CMatrix> {
    basis.iter().map(|b| &(w * b) * &w.adjoint()).collect()
}

fn quotient_positivity(t: &mut Trial, rng: &mut SplitMix64, dim_max: usize, tol: &TolerancePolicy) -> Result<()> {
    let n = rng.range_inclusive(2.min(dim_max), dim_max);
    let n1 = rng.range_inclusive(0, n);
    let n2 = n - n1;
    let star = rng.next_f64() < 0.7;
    let part = |k: usize, rng: &mut SplitMix64| -> Result<TroSpace> {
        if k == 0 {
            Ok(TroSpace::zero(0, 0))
        } else {
            random_tro(k, k, star, rng, tol)
        }
    };
    let z1 = part(n1, rng)?;
    let z2 = part(n2, rng)?;
    let w = rng.haar_unitary(n);
    let embed = |b: &CMatrix, first: bool| {
        let mut m = CMatrix::zeros(n, n);
        m.set_block(if first { 0 } else { n1 }, if first { 0 } else { n1 }, b);
        m
    };
    let j_basis: Vec<CMatrix> = z1.basis().iter().map(|b| embed(b, true)).collect();
    let mut z_basis = j_basis.clone();
    z_basis.extend(z2.basis().iter().map(|b| embed(b, false)));
    let z = Arc::new(TroSpace::from_basis(n, n, true, conjugate(&z_basis, &w), tol)?);
    let j = Subspace::span(n, n, &conjugate(&j_basis, &w), tol);
    t.witness("space", &*z);
    t.witness("ideal_basis", j.basis());
    t.check(z.is_ternary_ideal(&j, tol)?, || "summand is not recognized as a ternary ideal".into());
    let (quotient, map) = z.quotient_by_ideal(&j, tol)?;
    t.check(map.validate_ternary(tol).is_ok(), || "quotient map is not ternary".into());
    t.record("quotient_ternary_residual", map.ternary_residual(), 1e-8);
    let killed = j
        .basis()
        .iter()
        .map(|b| map.apply(b, tol).map(|m| m.frob_norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    t.record("ideal_image", killed, 1e-8);
    t.check(quotient.dim() + j.dim() == z.dim(), || {
        format!("quotient dimension {} + ideal {} ≠ {}", quotient.dim(), j.dim(), z.dim())
    });
    let jz = z.j_subalgebra(tol)?;
    for _ in 0..20 {
        let y = random_element(jz.subspace(), rng);
        let x = &y.adjoint() * &y;
        let image = map.apply(&x, tol)?;
        let scale = x.frob_norm().max(1.0);
        t.record("image_negative_eigenvalue", (-min_eig(&image)).max(0.0) / scale, 1e-9);
        t.record("image_hermitian_defect", image.hermitian_defect() / scale, 1e-9);
    }
    Ok(())
}

fn random_psd(n: usize, rng: &mut SplitMix64) -> CMatrix {
    let r = rng.range_inclusive(1, n);
    let g = rng.ginibre(n, r);
    let p = &g * &g.adjoint();
    p.scale(1.0 / p.spectral_norm()).hermitian_part()
}

fn boundary_cone_suite(t: &mut Trial, rng: &mut SplitMix64, dim_max: usize, tol: &TolerancePolicy) -> Result<()> {
    let n = rng.range_inclusive(1, dim_max.min(4));
    let k = rng.range_inclusive(1, 3);
    let gens: Vec<CMatrix> = (0..k).map(|_| random_psd(n, rng)).collect();
    let mut basis = gens.clone();
    let dense = rng.coin();
    if !dense {
        basis.push(rng.ginibre(n, n));
    }
    let x = OrderedSpace::new(basis, gens.clone())?;
    t.witness("ordered_space", &x);
    let bc = boundary_cone(&x, tol)?;
    t.check(bc.report.verdict == Some(true), || "a generator is outside d_u".into());
    t.record("level1_residual", bc.report.residuals["level1_max_residual"], 1e-8);
    t.record("level2_residual", bc.report.residuals["level2_max_residual"], 1e-8);
    if k >= 2 {
        let fewer = OrderedSpace::new(gens[..k - 1].to_vec(), gens[..k - 1].to_vec())?;
        let u_small = boundary_cone(&fewer, tol)?.u;
        let full = Arc::new(TroSpace::full(n, n));
        let s = Tripotent::new(full.clone(), u_small.matrix(), tol)?;
        let l = Tripotent::new(full, bc.u.matrix(), tol)?;
        t.check(leq(&s, &l, tol)?, || "adding a generator shrank u".into());
    }
    if x.densely_spanning(tol) {
        let report = bk_check(&x, tol)?;
        t.check(report.verdict == Some(true), || format!("bk_check failed: {:?}", report.residuals));
        let j = bc.w.j_subalgebra(tol)?;
        let mut outside = 0;
        for _ in 0..SAMPLES_PER_TRIAL {
            let y = random_element(bc.w.subspace(), rng);
            let p = psd_part(&y.hermitian_part());
            if !j.contains(&p, tol)? {
                outside += 1;
            }
        }
        t.record("psd_outside_j", outside as f64, 0.0);
    }
    Ok(())
}

fn annihilator_maximal(t: &mut Trial, rng: &mut SplitMix64, dim_max: usize, tol: &TolerancePolicy) -> Result<()> {
    let n = rng.range_inclusive(2.min(dim_max), dim_max);
    let off = if n >= 2 && rng.next_f64() < 0.75 { rng.range_inclusive(2, n) } else { 0 };
    let a = if off > 0 { rng.range_inclusive(1, off - 1) } else { 0 };
    let c = n - off;
    let mut basis = Vec::new();
    for i in 0..off {
        for j in 0..off {
            if (i < a) != (j < a) {
                basis.push(CMatrix::unit(n, n, i, j));
            }
        }
    }
    let algebra = if c > 0 { Some(random_tro(c, c, true, rng, tol)?) } else { None };
    if let Some(alg) = &algebra {
        for b in alg.basis() {
            let mut m = CMatrix::zeros(n, n);
            m.set_block(off, off, b);
            basis.push(m);
        }
    }
    let w = rng.haar_unitary(n);
    let z = Arc::new(TroSpace::from_basis(n, n, true, conjugate(&basis, &w), tol)?);
    t.witness("space", &*z);
    let mut unit = CMatrix::zeros(n, n);
    if let Some(alg) = &algebra {
        let support = alg
            .basis()
            .iter()
            .fold(CMatrix::zeros(c, c), |acc, b| &acc + &(&b.adjoint() * b));
        unit.set_block(off, off, &range_projection(&support, tol));
    }
    let unit = &(&w * &unit) * &w.adjoint();
    let off_dim = 2 * a * (off - a);

    let centre = central_orthogonal_space(&Tripotent::zero(z.clone()), tol);
    let mut candidates = vec![Tripotent::zero(z.clone())];
    for _ in 0..4 {
        if centre.is_zero() {
            break;
        }
        let coeffs: Vec<f64> = (0..centre.dim()).map(|_| rng.normal()).collect();
        let h = centre.combine(&coeffs);
        let s = crate::linalg::svd(&h).singular;
        let rank = s.iter().filter(|&&v| v > 1e-6 * s[0]).count();
        if rank == 0 {
            continue;
        }
        let lo = s[rng.below(rank)] * (1.0 - 1e-6);
        candidates.push(spectral_tripotent(&z, &h, lo, f64::INFINITY, tol)?);
    }
    for u in &candidates {
        let maximal = central_sa_maximal(u, tol)?;
        let m = u.matrix();
        let oracle = (&(m * m) - &unit).frob_norm() <= 1e-8;
        t.check(maximal == oracle, || {
            format!("central_sa_maximal = {maximal}, oracle from the algebra unit = {oracle}")
        });
        if maximal {
            for v in &candidates {
                if leq(u, v, tol)? {
                    t.record("strict_domination_of_maximal", (v.matrix() - m).frob_norm(), 1e-8);
                }
            }
            let report = orderable_probe(u, tol)?;
            t.record(
                "annihilator_dim_error",
                (report.residuals["annihilator_dim"] - off_dim as f64).abs(),
                0.0,
            );
            t.check(report.verdict == Some(off_dim == 0), || {
                format!("probe verdict {:?} with off-diagonal dimension {off_dim}", report.verdict)
            });
        } else {
            let orth = central_orthogonal_space(u, tol);
            let coeffs: Vec<f64> = (0..orth.dim()).map(|_| rng.normal()).collect();
            let extra = orth.combine(&coeffs);
            let step = spectral_tripotent(&z, &extra, 0.0, f64::INFINITY, tol)?;
            let bigger = Tripotent::new(z.clone(), &(m + step.matrix()), tol)?;
            t.check(leq(u, &bigger, tol)? && !leq(&bigger, u, tol)?, || {
                "no strictly larger central selfadjoint tripotent found for a non-maximal one".into()
            });
        }
    }
    Ok(())
}
