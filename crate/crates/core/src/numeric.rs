//! Small numerical helpers shared by the likelihood code.

/// Compensated (Neumaier) sum, in iteration order.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    let mut inf = 0.0f64;
    for v in values {
        if !v.is_finite() {
            inf += v;
            continue;
        }
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    if inf != 0.0 || inf.is_nan() {
        return inf;
    }
    sum + c
}

/// `log Σ w_i exp(l_i)` for non-negative weights.
pub fn log_sum_exp_weighted(terms: &[(f64, f64)]) -> f64 {
    let m = terms
        .iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(_, l)| *l)
        .fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if m == f64::INFINITY {
        return f64::INFINITY;
    }
    let s = neumaier_sum(terms.iter().filter(|(w, _)| *w > 0.0).map(|(w, l)| w * (l - m).exp()));
    m + s.ln()
}

/// Rising factorial `x (x+1) ... (x+n-1)`.
pub fn rising(x: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, t| acc * (x + t as f64))
}

/// JSON has no infinities; write them (and NaN) as strings.
pub(crate) fn ser_float<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}
