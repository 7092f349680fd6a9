//! Pure sequence-to-sequence transforms. Each returns the transformed target
//! sequence and checks the block majorizations the constructions rely on.

use crate::scalar::Scalar;

use super::majorization::{check_finite_majorization, Verdict};
use super::{
    delta_profile, strict_decrease_records, DeltaProfile, SequenceError, SequenceSpec, TailRegime,
};

fn window_of<T: Scalar>(
    lambda: &SequenceSpec<T>,
    d: &SequenceSpec<T>,
) -> Result<(usize, DeltaProfile<T>), SequenceError> {
    let w = d.len();
    lambda.require_len(w)?;
    Ok((w, delta_profile(lambda, d, w)?))
}

fn assert_block_majorized<T: Scalar>(
    d: &[T],
    dtilde: &[T],
    (a, b): (usize, usize),
    what: &str,
) -> Result<(), SequenceError> {
    match check_finite_majorization(&dtilde[a - 1..b], &d[a - 1..b])? {
        Verdict::Ok => Ok(()),
        Verdict::Violation { .. } => Err(SequenceError::Precondition(format!(
            "{what}: block {a}..={b} of d is not majorized by the transformed values"
        ))),
    }
}

/// Linear interpolation of δ between consecutive strict-decrease records:
/// `d̃_i = λ_i + (δ_{m_{j+1}} − δ_{m_j}) / (m_{j+1} − m_j)` on
/// `{m_j+1, …, m_{j+1}}`, `d̃_1 = d_1`. The result has length `m_J`.
pub fn averaged_interpolant<T: Scalar>(
    lambda: &SequenceSpec<T>,
    d: &SequenceSpec<T>,
    records: &[usize],
) -> Result<SequenceSpec<T>, SequenceError> {
    let (w, p) = window_of(lambda, d)?;
    let all = strict_decrease_records(&p);
    if records.is_empty() || records.len() > all.len() || all[..records.len()] != *records {
        return Err(SequenceError::InvalidRecords(format!(
            "{records:?} is not a prefix of the strict-decrease records of the window"
        )));
    }
    let last = *records.last().unwrap();
    if let Some(k) = (1..=last).find(|&k| p.delta(k) <= T::zero()) {
        return Err(SequenceError::NegativeDelta { index: k });
    }
    let lv = lambda.values();
    let mut out = Vec::with_capacity(last);
    out.push(d.at(1));
    for pair in records.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let step = (p.delta(b) - p.delta(a)) / T::from_count(b - a);
        out.extend(lv[a..b].iter().map(|&l| l + step));
    }
    debug_assert!(out.len() == last && last <= w);
    for pair in records.windows(2) {
        assert_block_majorized(
            d.values(),
            &out,
            (pair[0] + 1, pair[1]),
            "averaged interpolant",
        )?;
    }
    SequenceSpec::derived(out, d.regime(), format!("{}~interp", d.name()))
}

/// `d̃_1 = λ_1 + δ_N`, `d̃_i = λ_i` for `2 ≤ i ≤ N`, `d̃_i = d_i` beyond.
pub fn flat_prefix_transform<T: Scalar>(
    lambda: &SequenceSpec<T>,
    d: &SequenceSpec<T>,
    n: usize,
) -> Result<SequenceSpec<T>, SequenceError> {
    let (w, p) = window_of(lambda, d)?;
    if n == 0 || n > w {
        return Err(SequenceError::Precondition(format!(
            "N = {n} outside window 1..={w}"
        )));
    }
    let dn = p.delta(n);
    if let Some(k) = (1..n).find(|&k| dn > p.delta(k) + p.zero_tol) {
        return Err(SequenceError::Precondition(format!(
            "δ_N = {dn} exceeds δ_{k} = {}",
            p.delta(k)
        )));
    }
    let mut out = d.values().to_vec();
    out[0] = lambda.at(1) + dn;
    out[1..n].copy_from_slice(&lambda.values()[1..n]);
    assert_block_majorized(d.values(), &out, (1, n), "flat prefix")?;
    SequenceSpec::derived(out, d.regime(), format!("{}~flat", d.name()))
}

/// Moves every block's mass onto its closing tail minimum:
/// `d̃_{m_j} = λ_{m_j} + δ_{m_j} − δ_{m_{j−1}}`, `d̃_i = λ_i` otherwise.
/// The result has length `m_J`.
pub fn tonondec_transform<T: Scalar>(
    lambda: &SequenceSpec<T>,
    d: &SequenceSpec<T>,
    tail_minima: &[usize],
) -> Result<SequenceSpec<T>, SequenceError> {
    let (w, p) = window_of(lambda, d)?;
    let uncertified = |why: String| {
        Err(SequenceError::InvalidRecords(format!(
            "uncertified minima: {why}"
        )))
    };
    let Some(&last) = tail_minima.last() else {
        return uncertified("empty list".into());
    };
    if tail_minima[0] == 0 || last > w || tail_minima.windows(2).any(|x| x[0] >= x[1]) {
        return uncertified(format!("{tail_minima:?} is not increasing within 1..={w}"));
    }
    if let Some(k) = (1..=last).find(|&k| p.delta(k) < -p.zero_tol) {
        return Err(SequenceError::NegativeDelta { index: k });
    }
    let mut prev = 0;
    for &m in tail_minima {
        if let Some(k) = (prev + 1..=last).find(|&k| p.delta(k) < p.delta(m)) {
            return uncertified(format!("δ_{k} < δ_{m}"));
        }
        prev = m;
    }
    let mut out = lambda.values()[..last].to_vec();
    let mut prev = 0;
    for &m in tail_minima {
        out[m - 1] = out[m - 1] + (p.delta(m) - p.delta(prev));
        prev = m;
    }
    let lam = &lambda.values()[..last];
    let mut acc = T::zero();
    let mut last_delta = T::zero();
    for (i, (&x, &l)) in out.iter().zip(lam).enumerate() {
        acc = acc + (x - l);
        if acc < last_delta {
            return Err(SequenceError::Precondition(format!(
                "transformed partial sums decrease at {}",
                i + 1
            )));
        }
        last_delta = acc;
    }
    let mut prev = 0;
    for &m in tail_minima {
        assert_block_majorized(d.values(), &out, (prev + 1, m), "tail-minima transform")?;
        prev = m;
    }
    SequenceSpec::derived(out, d.regime(), format!("{}~tonondec", d.name()))
}

fn validate_alpha<T: Scalar>(alpha: T) -> Result<(), SequenceError> {
    if !alpha.to_f64_lossy().is_finite() || alpha < T::zero() {
        return Err(SequenceError::RegimeInvalid(format!(
            "liminf δ must be a finite nonnegative number, got {alpha}"
        )));
    }
    Ok(())
}

/// Minimal `M` with `δ_k ≥ α` on `[M, window]`, and minimal
/// `N > max(M, kα/δ_k : k < M)` inside the window.
pub fn limalpha_choose_n<T: Scalar>(
    profile: &DeltaProfile<T>,
    alpha: T,
) -> Result<(usize, usize), SequenceError> {
    validate_alpha(alpha)?;
    let w = profile.window();
    let tol = profile.zero_tol;
    let mut m = w + 1;
    while m > 1 && profile.delta(m - 1) >= alpha - tol {
        m -= 1;
    }
    if m == w + 1 {
        return Err(SequenceError::RegimeInvalid(format!(
            "δ_{w} = {} is below the declared α = {alpha}",
            profile.delta(w)
        )));
    }
    // Minimal integer N with N·δ_k > kα, computed exactly in T after an
    // f64 starting guess.
    let mut n = m + 1;
    for k in 1..m {
        let dk = profile.delta(k);
        if dk <= T::zero() {
            return Err(SequenceError::NoValidN {
                window: w,
                reason: format!("δ_{k} = {dk} is not positive"),
            });
        }
        let ka = T::from_count(k) * alpha;
        let guess = (ka / dk).to_f64_lossy();
        if !(guess < (w + 1) as f64) {
            return Err(SequenceError::NoValidN {
                window: w,
                reason: format!("N must exceed kα/δ_k = {guess} at k = {k}"),
            });
        }
        let mut c = guess.max(0.0).floor() as usize;
        while c > 0 && T::from_count(c) * dk > ka {
            c -= 1;
        }
        while T::from_count(c) * dk <= ka {
            c += 1;
        }
        n = n.max(c);
    }
    if n > w {
        return Err(SequenceError::NoValidN {
            window: w,
            reason: format!("minimal N = {n} exceeds the window"),
        });
    }
    Ok((m, n))
}

/// `d̃_i = d_i − α/N` for `i ≤ N`.
pub fn limalpha_shift<T: Scalar>(
    lambda: &SequenceSpec<T>,
    d: &SequenceSpec<T>,
    alpha: T,
    n: usize,
) -> Result<SequenceSpec<T>, SequenceError> {
    validate_alpha(alpha)?;
    let (w, p) = window_of(lambda, d)?;
    if alpha == T::zero() {
        return Ok(d.clone().with_regime(TailRegime::ConservationOfMass));
    }
    let (m, n_min) = limalpha_choose_n(&p, alpha)?;
    if n < n_min || n > w {
        return Err(SequenceError::NoValidN {
            window: w,
            reason: format!(
                "N = {n} does not exceed max(M = {m}, kα/δ_k); minimal valid N is {n_min}"
            ),
        });
    }
    let shift = alpha / T::from_count(n);
    let mut out = d.values().to_vec();
    for x in &mut out[..n] {
        *x = *x - shift;
    }
    let mut acc = T::zero();
    for (k, (&x, &l)) in out.iter().zip(lambda.values()).enumerate() {
        acc = acc + (x - l);
        if acc < -p.zero_tol {
            return Err(SequenceError::NegativeDelta { index: k + 1 });
        }
    }
    SequenceSpec::derived(
        out,
        TailRegime::ConservationOfMass,
        format!("{}~shift", d.name()),
    )
}

/// Tail data of a strictly-decreasing-δ conservation pair. Vectors are
/// indexed from `n = 1`; the window is `d`'s length, and `λ̃`, `t` reach one
/// index further when `λ` is longer.
#[derive(Debug, Clone, PartialEq)]
pub struct DecdelTailData<T> {
    /// `λ̃_n = λ_n − δ_{n−1}`.
    pub lambda_tilde: Vec<T>,
    /// `t_n = Σ_{i≥n} (λ_i − d_i) = δ_{n−1}`.
    pub t: Vec<T>,
    /// `α̃_n = (λ_{n+1} − d_n) / (λ_{n+1} − λ̃_n)`, for every `n` with
    /// `λ_{n+1}` available.
    pub alpha_tilde: Vec<T>,
}

pub fn decdel_tail_data<T: Scalar>(
    lambda: &SequenceSpec<T>,
    d: &SequenceSpec<T>,
) -> Result<DecdelTailData<T>, SequenceError> {
    if d.regime() != TailRegime::ConservationOfMass {
        return Err(SequenceError::RegimeMismatch {
            expected: "conservation".into(),
            found: d.regime().label().into(),
        });
    }
    let (w, p) = window_of(lambda, d)?;
    if let Some(k) = (1..=w).find(|&k| p.delta(k) <= T::zero()) {
        return Err(SequenceError::NegativeDelta { index: k });
    }
    // Strict decrease can be lost to rounding once d_n and λ_n agree to
    // the last bit; the chain only needs the interlacing checked below.
    if let Some(k) = (2..=w).find(|&k| p.delta(k) > p.delta(k - 1) + p.zero_tol) {
        return Err(SequenceError::Precondition(format!(
            "δ is not decreasing at {k}: {} > {}",
            p.delta(k),
            p.delta(k - 1)
        )));
    }
    // One extra λ value extends λ̃, t and α̃ through n = w.
    let ext = if lambda.len() > w { w + 1 } else { w };
    let t: Vec<T> = (1..=ext).map(|n| p.delta(n - 1)).collect();
    let lambda_tilde: Vec<T> = (1..=ext).map(|n| lambda.at(n) - t[n - 1]).collect();
    let mut alpha_tilde = Vec::with_capacity(ext - 1);
    for n in 1..ext {
        let (lt, dn, next) = (lambda_tilde[n - 1], d.at(n), lambda.at(n + 1));
        if !(lt < dn && dn < next && lambda_tilde[n] < next) {
            return Err(SequenceError::Precondition(format!(
                "interlacing λ̃_n < d_n < λ_(n+1) fails at n = {n}: {lt}, {dn}, {next}"
            )));
        }
        alpha_tilde.push((next - dn) / (next - lt));
    }
    Ok(DecdelTailData {
        lambda_tilde,
        t,
        alpha_tilde,
    })
}
