//! Maximum-likelihood fitting of the peak model and likelihood ratios
//! between hypotheses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alleles::AlleleFrequencyTable;
use crate::engine::{EngineOptions, LikelihoodReport, PreparedLikelihood};
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::numeric::neumaier_sum;
use crate::peakmodel::{EpgData, MixtureModelParams};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MleOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop when the log-likelihood spread over the simplex is below this.
    pub tol: f64,
    pub threshold: f64,
    pub engine: EngineOptions,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions { starts: 5, seed: 1, max_iter: 2000, tol: 1e-8, threshold: 50.0, engine: EngineOptions::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MleResult {
    /// One parameter set per EPG.
    pub params: Vec<MixtureModelParams>,
    #[serde(serialize_with = "crate::numeric::ser_float")]
    pub log_lik: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Unconstrained coordinates for one EPG's parameters: log rho, log eta,
/// logit xi, then stick-breaking logits for the free proportions.
struct Layout {
    k: usize,
    free: Vec<Vec<usize>>,
    threshold: f64,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    (p / (1.0 - p)).ln()
}

impl Layout {
    fn dim(&self) -> usize {
        self.free.iter().map(|f| 3 + f.len() - 1).sum()
    }

    fn decode(&self, x: &[f64]) -> Vec<MixtureModelParams> {
        let mut out = Vec::with_capacity(self.free.len());
        let mut i = 0;
        for free in &self.free {
            let rho = x[i].exp();
            let eta = x[i + 1].exp();
            let xi = sigmoid(x[i + 2]);
            i += 3;
            let mut phi = vec![0.0; self.k];
            let mut rest = 1.0;
            for (j, &slot) in free.iter().enumerate() {
                if j + 1 == free.len() {
                    phi[slot] = rest;
                } else {
                    let s = sigmoid(x[i]);
                    i += 1;
                    phi[slot] = rest * s;
                    rest -= phi[slot];
                }
            }
            out.push(MixtureModelParams { rho, xi, eta, phi, threshold: self.threshold });
        }
        out
    }

    fn encode(&self, params: &[MixtureModelParams]) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim());
        for (p, free) in params.iter().zip(&self.free) {
            x.push(p.rho.ln());
            x.push(p.eta.ln());
            x.push(logit(p.xi));
            let mut rest = 1.0;
            for &slot in &free[..free.len() - 1] {
                let s = if rest > 0.0 { p.phi[slot] / rest } else { 0.5 };
                x.push(logit(s));
                rest -= p.phi[slot];
            }
        }
        x
    }
}

/// Nelder-Mead minimisation; returns the best point, its value, and the
/// number of evaluations. Non-finite values count as +inf.
fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> Result<f64>,
    x0: &[f64],
    step: f64,
    max_iter: usize,
    tol: f64,
) -> Result<(Vec<f64>, f64, usize, bool)> {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        let v = f(x)?;
        Ok(if v.is_finite() { v } else { f64::INFINITY })
    };
    if n == 0 {
        let v = eval(x0, &mut evals)?;
        return Ok((x0.to_vec(), v, evals, true));
    }
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals = Vec::with_capacity(n + 1);
    for p in &pts {
        vals.push(eval(p, &mut evals)?);
    }
    let mut converged = false;
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        if vals[n].is_finite() && vals[n] - vals[0] < tol {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|d| pts[..n].iter().map(|p| p[d]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|d| centroid[d] + t * (pts[n][d] - centroid[d])).collect() };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals)?;
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals)?;
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(-0.5);
            let fc = eval(&xc, &mut evals)?;
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = eval(&xc, &mut evals)?;
            (xc, fc)
        };
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for i in 1..=n {
            let p: Vec<f64> = (0..n).map(|d| pts[0][d] + 0.5 * (pts[i][d] - pts[0][d])).collect();
            vals[i] = eval(&p, &mut evals)?;
            pts[i] = p;
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    Ok((pts[best].clone(), vals[best], evals, converged))
}

/// Crude scale from the data: mean observed signal per marker.
fn mean_signal(epg: &EpgData, threshold: f64) -> f64 {
    let sums: Vec<f64> = epg
        .markers()
        .iter()
        .map(|m| m.peaks.iter().filter(|(_, z)| *z > threshold).map(|(_, z)| z).sum())
        .collect();
    if sums.is_empty() {
        return threshold;
    }
    (sums.iter().sum::<f64>() / sums.len() as f64).max(threshold)
}

fn starting_point(
    epgs: &[EpgData],
    layout: &Layout,
    start: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<MixtureModelParams> {
    epgs.iter()
        .zip(&layout.free)
        .map(|(epg, free)| {
            let jitter = |rng: &mut ChaCha8Rng| if start == 0 { 1.0 } else { rng.random_range(0.6..1.6) };
            let eta = 40.0 * jitter(rng);
            let rho = (mean_signal(epg, layout.threshold) / (2.0 * eta) * jitter(rng)).max(0.05);
            let xi = (0.05 * jitter(rng)).min(0.5);
            let mut phi = vec![0.0; layout.k];
            let w: Vec<f64> = (0..free.len())
                .map(|j| if start == 0 { (free.len() - j) as f64 } else { rng.random_range(0.1..1.0) })
                .collect();
            let total: f64 = w.iter().sum();
            for (&slot, w) in free.iter().zip(&w) {
                phi[slot] = w / total;
            }
            MixtureModelParams { rho, xi, eta, phi, threshold: layout.threshold }
        })
        .collect()
}

/// Maximum-likelihood estimates of the peak-model parameters, one set per
/// EPG, under `hyp`.
pub fn mle(
    epgs: &[EpgData],
    hyp: &Hypothesis,
    freqs: &AlleleFrequencyTable,
    init: Option<&[MixtureModelParams]>,
    opts: &MleOptions,
) -> Result<MleResult> {
    let prepared = PreparedLikelihood::new(&hyp.model()?, epgs, freqs, &opts.engine)?;
    mle_prepared(&prepared, epgs, hyp, init, opts)
}

pub fn mle_prepared(
    prepared: &PreparedLikelihood,
    epgs: &[EpgData],
    hyp: &Hypothesis,
    init: Option<&[MixtureModelParams]>,
    opts: &MleOptions,
) -> Result<MleResult> {
    let threshold = init.and_then(|p| p.first()).map(|p| p.threshold).unwrap_or(opts.threshold);
    if !epgs.iter().any(|e| e.has_signal(threshold)) {
        return Err(Error::DegenerateData);
    }
    let k = hyp.slots.len();
    let free: Vec<Vec<usize>> =
        (0..epgs.len()).map(|e| (0..k).filter(|i| !hyp.zeros(e).contains(i)).collect()).collect();
    let layout = Layout { k, free, threshold };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut evaluations = 0;
    let mut converged = false;
    let mut objective = |x: &[f64]| -> Result<f64> {
        let params = layout.decode(x);
        match prepared.evaluate(&params) {
            Ok(r) => Ok(-r.total),
            Err(Error::InvalidParams(_)) | Err(Error::NonFinite(_)) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    for start in 0..opts.starts.max(1) {
        let p0 = match (start, init) {
            (0, Some(p)) => p.to_vec(),
            _ => starting_point(epgs, &layout, start, &mut rng),
        };
        let mut x = layout.encode(&p0);
        let mut fx = f64::INFINITY;
        // restart from the best vertex until no further progress
        for _ in 0..4 {
            let (xn, fnew, ev, conv) = nelder_mead(&mut objective, &x, 0.4, opts.max_iter, opts.tol)?;
            evaluations += ev;
            let improved = fnew < fx - opts.tol;
            if fnew <= fx {
                x = xn;
                fx = fnew;
            }
            if !improved {
                converged |= conv;
                break;
            }
        }
        if fx.is_finite() && best.as_ref().is_none_or(|(_, b)| fx < *b) {
            best = Some((x, fx));
        }
    }
    let (x, fx) = best.ok_or_else(|| Error::NonFinite("likelihood is not finite at any starting point".into()))?;
    Ok(MleResult { params: layout.decode(&x), log_lik: -fx, evaluations, converged })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrPolicy {
    /// Both hypotheses evaluated at the MLEs under the null.
    SharedH0Mles,
    /// Each hypothesis at its own MLEs.
    SeparateMles,
    /// Both hypotheses at user-supplied parameters.
    FixedParams,
    /// Parameters chosen to minimise the ratio; not available.
    MinimiseRatio,
}

impl std::str::FromStr for LrPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "shared_h0_mles" => Ok(LrPolicy::SharedH0Mles),
            "separate_mles" => Ok(LrPolicy::SeparateMles),
            "fixed_params" => Ok(LrPolicy::FixedParams),
            "minimise_ratio" | "minimize_ratio" => Ok(LrPolicy::MinimiseRatio),
            _ => Err(Error::Config(format!("unknown policy `{s}`"))),
        }
    }
}


#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarkerLr {
    pub marker: String,
    #[serde(serialize_with = "crate::numeric::ser_float")]
    pub log10_lr: f64,
    /// Both hypotheses give zero likelihood.
    pub indeterminate: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LrReport {
    pub hp: String,
    pub h0: String,
    pub policy: LrPolicy,
    pub markers: Vec<MarkerLr>,
    #[serde(serialize_with = "crate::numeric::ser_float")]
    pub log10_lr: f64,
    pub indeterminate: bool,
    #[serde(serialize_with = "crate::numeric::ser_float")]
    pub log_lik_hp: f64,
    #[serde(serialize_with = "crate::numeric::ser_float")]
    pub log_lik_h0: f64,
    pub params_hp: Vec<MixtureModelParams>,
    pub params_h0: Vec<MixtureModelParams>,
}

/// Combine per-marker reports into a likelihood ratio.
pub fn compare(
    hp: (&str, &LikelihoodReport, &[MixtureModelParams]),
    h0: (&str, &LikelihoodReport, &[MixtureModelParams]),
    policy: LrPolicy,
) -> Result<LrReport> {
    let (a, b) = (hp.1, h0.1);
    if a.markers.len() != b.markers.len() || a.markers.iter().zip(&b.markers).any(|(x, y)| x.marker != y.marker) {
        return Err(Error::InvalidHypothesis("hypotheses were evaluated on different markers".into()));
    }
    let markers: Vec<MarkerLr> = a
        .markers
        .iter()
        .zip(&b.markers)
        .map(|(x, y)| {
            let indeterminate = x.log_lik == f64::NEG_INFINITY && y.log_lik == f64::NEG_INFINITY;
            let log10_lr = if indeterminate { f64::NAN } else { (x.log_lik - y.log_lik) / std::f64::consts::LN_10 };
            MarkerLr { marker: x.marker.clone(), log10_lr, indeterminate }
        })
        .collect();
    let total = neumaier_sum(markers.iter().map(|m| m.log10_lr));
    Ok(LrReport {
        hp: hp.0.to_string(),
        h0: h0.0.to_string(),
        policy,
        indeterminate: total.is_nan(),
        log10_lr: total,
        markers,
        log_lik_hp: a.total,
        log_lik_h0: b.total,
        params_hp: hp.2.to_vec(),
        params_h0: h0.2.to_vec(),
    })
}

/// Likelihood ratio of `hp` against `h0` on the same EPGs.
pub fn lr(
    epgs: &[EpgData],
    hp: &Hypothesis,
    h0: &Hypothesis,
    freqs: &AlleleFrequencyTable,
    policy: LrPolicy,
    params: Option<&[MixtureModelParams]>,
    opts: &MleOptions,
) -> Result<LrReport> {
    // the typed-genotype factor only cancels when both sides condition on the same people
    if !hp.typed.keys().eq(h0.typed.keys()) {
        return Err(Error::InvalidHypothesis(format!(
            "hypotheses condition on different typed people: {:?} vs {:?}",
            hp.typed.keys().collect::<Vec<_>>(),
            h0.typed.keys().collect::<Vec<_>>()
        )));
    }
    let prep_p = PreparedLikelihood::new(&hp.model()?, epgs, freqs, &opts.engine)?;
    let prep_0 = PreparedLikelihood::new(&h0.model()?, epgs, freqs, &opts.engine)?;
    let (pp, p0) = match policy {
        LrPolicy::MinimiseRatio => {
            return Err(Error::PolicyNotImplemented("minimise_ratio".into()));
        }
        LrPolicy::FixedParams => {
            let p = params.ok_or_else(|| Error::Config("fixed_params needs parameter values".into()))?;
            (p.to_vec(), p.to_vec())
        }
        LrPolicy::SharedH0Mles => {
            if hp.slots.len() != h0.slots.len() {
                return Err(Error::InvalidHypothesis(
                    "shared parameters need the same number of contributors under both hypotheses".into(),
                ));
            }
            let fit = mle_prepared(&prep_0, epgs, h0, params, opts)?;
            (fit.params.clone(), fit.params)
        }
        LrPolicy::SeparateMles => {
            let f0 = mle_prepared(&prep_0, epgs, h0, params, opts)?;
            let fp = mle_prepared(&prep_p, epgs, hp, params, opts)?;
            (fp.params, f0.params)
        }
    };
    let rp = prep_p.evaluate(&pp)?;
    let r0 = if std::ptr::eq(hp, h0) { rp.clone() } else { prep_0.evaluate(&p0)? };
    compare((&hp.name, &rp, &pp), (&h0.name, &r0, &p0), policy)
}
