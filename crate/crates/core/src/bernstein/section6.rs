//! The oscillating-index construction: a piecewise power `f` whose exponents
//! alternate between 1/3 and 1/2, its Stieltjes transform `g`, and the
//! complete Bernstein function built from `g`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{try_integrate_log, QuadSpec};

const BREAKPOINT_CAP: f64 = 1e300;
const FIRST_BREAK: f64 = 2.0;

/// How consecutive pieces are glued together.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Continuity {
    /// `f = x^beta + C_k`, the literal construction.
    Additive,
    /// `f = K_k x^beta`.
    #[default]
    Multiplicative,
}

/// Which function of `g` is exposed as `phi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SectionSixForm {
    /// `phi(lambda) = lambda * g(lambda)`.
    #[default]
    LambdaG,
    /// `phi(lambda) = 1 / g(lambda)`.
    ReciprocalG,
}

/// One piece `f(x) = scale * x^beta + offset` on `(lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub beta: f64,
    pub scale: f64,
    pub offset: f64,
}

impl Piece {
    fn f(&self, x: f64) -> f64 {
        self.scale * x.powf(self.beta) + self.offset
    }
    fn df(&self, x: f64) -> f64 {
        self.scale * self.beta * x.powf(self.beta - 1.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseSchedule {
    pub epsilon: f64,
    pub continuity: Continuity,
    pub pieces: Vec<Piece>,
    /// Threshold beyond which the unbounded last piece meets the closeness tolerance.
    pub settle: Option<f64>,
}

fn exponent(k: usize) -> f64 {
    if k % 2 == 1 {
        1.0 / 3.0
    } else {
        0.5
    }
}

/// Worst closeness error of the additive piece `x^beta + c` over the top decade of `(.., a]`
/// and `lambda in [1, lam_max]`.
fn additive_closeness(beta: f64, c: f64, a: f64, lam_max: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..=10 {
        let x = a / 10.0 * 10f64.powf(i as f64 / 10.0);
        let base = x.powf(beta) + c;
        if base <= 0.0 {
            return f64::INFINITY;
        }
        for j in 0..=10 {
            let lam = 1.0 + (lam_max - 1.0) * j as f64 / 10.0;
            let err = (c * (lam.powf(beta) - 1.0) / base).abs();
            worst = worst.max(err);
        }
    }
    worst
}

/// Build a schedule with `num_pieces` pieces; the last one is unbounded.
pub fn section6_build_f(num_pieces: usize, epsilon: f64, continuity: Continuity) -> Result<PiecewiseSchedule> {
    if num_pieces < 1 {
        return Err(Error::Schedule("num_pieces must be >= 1".into()));
    }
    if !(epsilon > 0.0 && epsilon < 0.2) {
        return Err(Error::Schedule(format!("epsilon {epsilon} outside (0, 0.2)")));
    }
    // additive offsets drive the breakpoint rule for both continuity modes
    let mut ends = vec![FIRST_BREAK];
    let mut add_val = FIRST_BREAK.sqrt();
    let mut settle = None;
    for k in 1..num_pieces {
        let beta = exponent(k);
        let lo = ends[k - 1];
        let c = add_val - lo.powf(beta);
        let lam_max = (k + 1) as f64;
        let mut a = 10f64.powf(((10.0 * lo).log10() - 1e-12).ceil());
        while additive_closeness(beta, c, a, lam_max) > epsilon {
            a *= 10.0;
            if a > BREAKPOINT_CAP {
                return Err(Error::Schedule(format!(
                    "piece {k}: tolerance {epsilon} not met below {BREAKPOINT_CAP:e}"
                )));
            }
        }
        if k + 1 == num_pieces {
            settle = Some(a);
        } else {
            add_val = a.powf(beta) + c;
            ends.push(a);
        }
    }
    let mut pieces = Vec::with_capacity(num_pieces);
    let mut prev_val = 0.0;
    for k in 0..num_pieces {
        let lo = if k == 0 { 0.0 } else { ends[k - 1] };
        let hi = if k + 1 == num_pieces { f64::INFINITY } else { ends[k] };
        let beta = exponent(k);
        let (scale, offset) = if k == 0 {
            (1.0, 0.0)
        } else {
            match continuity {
                Continuity::Additive => (1.0, prev_val - lo.powf(beta)),
                Continuity::Multiplicative => (prev_val / lo.powf(beta), 0.0),
            }
        };
        let p = Piece {
            lo,
            hi,
            beta,
            scale,
            offset,
        };
        if hi.is_finite() {
            prev_val = p.f(hi);
        }
        pieces.push(p);
    }
    Ok(PiecewiseSchedule {
        epsilon,
        continuity,
        pieces,
        settle,
    })
}

impl PiecewiseSchedule {
    /// `f(x) = x^{1/2}` on all of `(0, inf)`.
    pub fn degenerate() -> Self {
        PiecewiseSchedule {
            epsilon: 0.05,
            continuity: Continuity::Multiplicative,
            pieces: vec![Piece {
                lo: 0.0,
                hi: f64::INFINITY,
                beta: 0.5,
                scale: 1.0,
                offset: 0.0,
            }],
            settle: None,
        }
    }

    /// Finite breakpoints `2 = a_0 < a_1 < ...`.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| p.hi).filter(|h| h.is_finite()).collect()
    }

    fn piece(&self, x: f64) -> &Piece {
        let i = self.pieces.partition_point(|p| p.hi < x);
        &self.pieces[i.min(self.pieces.len() - 1)]
    }

    pub fn f(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.piece(x).f(x)
    }

    /// Density of the Stieltjes measure `sigma(ds) = f'(s) ds`.
    pub fn f_prime(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.piece(x).df(x)
    }

    /// Worst `|f_k(lambda x)/f_k(x) - lambda^beta|` over the top decade of piece `k`
    /// and `lambda in [1, k+1]`, with `f_k` the formula of piece `k`.
    pub fn closeness_error(&self, k: usize) -> f64 {
        let p = &self.pieces[k];
        let top = if p.hi.is_finite() {
            p.hi
        } else {
            match self.settle {
                Some(s) => s,
                None => return 0.0,
            }
        };
        let lam_max = (k + 1) as f64;
        let mut worst: f64 = 0.0;
        for i in 0..=20 {
            let x = top / 10.0 * 10f64.powf(i as f64 / 20.0);
            for j in 0..=20 {
                let lam = 1.0 + (lam_max - 1.0) * j as f64 / 20.0;
                worst = worst.max((p.f(lam * x) / p.f(x) - lam.powf(p.beta)).abs());
            }
        }
        worst
    }

    fn validate(&self) -> Result<()> {
        if self.pieces.is_empty() {
            return Err(Error::InvalidModel("empty schedule".into()));
        }
        for w in self.pieces.windows(2) {
            if w[0].hi != w[1].lo {
                return Err(Error::InvalidModel("schedule pieces not contiguous".into()));
            }
            let (l, r) = (w[0].f(w[0].hi), w[1].f(w[1].lo));
            if (l - r).abs() > 1e-9 * l.abs().max(1.0) {
                return Err(Error::InvalidModel(format!("f discontinuous at {:e}", w[0].hi)));
            }
        }
        if self.pieces.iter().any(|p| p.scale <= 0.0 || p.f(p.lo.max(1e-300)) < 0.0) {
            return Err(Error::InvalidModel("f not increasing and nonnegative".into()));
        }
        Ok(())
    }
}

/// `g(lambda) = ∫_0^∞ f(xi) / (lambda + xi)^2 dxi`.
pub fn stieltjes_g(schedule: &PiecewiseSchedule, lambda: f64, spec: &QuadSpec) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("stieltjes_g at lambda = {lambda}")));
    }
    schedule.validate()?;
    let bps = schedule.breakpoints();
    let last = bps.last().copied().unwrap_or(1.0);
    let lo = lambda.min(FIRST_BREAK) * 1e-14;
    let hi = lambda.max(last) * 1e16;
    // (0, lo]: f = x^{1/2} there and (lambda + xi)^2 ~ lambda^2
    let head = (2.0 / 3.0) * lo.powf(1.5) / (lambda * lambda);
    let mut cuts = bps.clone();
    cuts.push(lambda);
    let body = try_integrate_log(
        |xi| Ok(schedule.f(xi) / ((lambda + xi) * (lambda + xi))),
        lo,
        hi,
        &cuts,
        spec,
    )
    .map_err(|e| annotate(e, "stieltjes_g"))?;
    let tail_piece = schedule.pieces.last().unwrap();
    let tail = tail_piece.scale * hi.powf(tail_piece.beta - 1.0) / (1.0 - tail_piece.beta)
        + tail_piece.offset / hi;
    Ok(head + body.value + tail)
}

/// `lambda * g(lambda)`.
pub fn section6_phi(schedule: &PiecewiseSchedule, lambda: f64, spec: &QuadSpec) -> Result<f64> {
    Ok(lambda * stieltjes_g(schedule, lambda, spec)?)
}

/// Levy density `mu(t) = ∫ s e^{-st} f'(s) ds` of the subordinator with exponent `lambda g(lambda)`.
pub fn mu_from_stieltjes(schedule: &PiecewiseSchedule, t: f64, spec: &QuadSpec) -> Result<f64> {
    laplace_of_sigma(schedule, t, 1, spec)
}

/// Tail `mu(t, ∞) = ∫ e^{-st} f'(s) ds`.
pub fn mu_tail_from_stieltjes(schedule: &PiecewiseSchedule, t: f64, spec: &QuadSpec) -> Result<f64> {
    laplace_of_sigma(schedule, t, 0, spec)
}

/// `∫ s^power e^{-st} sigma(ds)`.
fn laplace_of_sigma(schedule: &PiecewiseSchedule, t: f64, power: i32, spec: &QuadSpec) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("mu at t = {t}")));
    }
    schedule.validate()?;
    let scale = 1.0 / t;
    let lo = scale.min(FIRST_BREAK) * 1e-14;
    let hi = scale * 750.0;
    // near 0: sigma(ds) = s^{-1/2}/2 ds, e^{-st} ~ 1
    let p = power as f64;
    let head = 0.5 * lo.powf(p + 0.5) / (p + 0.5);
    let mut cuts = schedule.breakpoints();
    cuts.push(scale);
    let body = try_integrate_log(
        |s| Ok(s.powi(power) * (-s * t).exp() * schedule.f_prime(s)),
        lo,
        hi,
        &cuts,
        spec,
    )
    .map_err(|e| annotate(e, "mu_from_stieltjes"))?;
    Ok(head + body.value)
}

fn annotate(e: Error, what: &str) -> Error {
    match e {
        Error::Quadrature {
            achieved,
            target,
            context,
        } => Error::Quadrature {
            achieved,
            target,
            context: format!("{what} {context}"),
        },
        other => other,
    }
}

/// Constants `c1 = min g(l) l^{2/3}` and `c2 = max g(l) l^{1/2}` over `lambdas`.
pub fn g_bounds(schedule: &PiecewiseSchedule, lambdas: &[f64], spec: &QuadSpec) -> Result<(f64, f64)> {
    let mut c1 = f64::INFINITY;
    let mut c2: f64 = 0.0;
    for &l in lambdas {
        let g = stieltjes_g(schedule, l, spec)?;
        c1 = c1.min(g * l.powf(2.0 / 3.0));
        c2 = c2.max(g * l.sqrt());
    }
    Ok((c1, c2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use statrs::function::beta::{beta, beta_reg};
    use statrs::function::gamma::{gamma, gamma_lr};

    fn spec() -> QuadSpec {
        QuadSpec::with_rel_tol(1e-10)
    }

    /// g by the incomplete-beta closed form of each piece:
    /// ∫ (K x^b + C)/(l+x)^2 over (lo,hi).
    fn g_oracle(s: &PiecewiseSchedule, l: f64) -> f64 {
        s.pieces
            .iter()
            .map(|p| {
                let ua = p.lo / (l + p.lo);
                let ub = if p.hi.is_finite() { p.hi / (l + p.hi) } else { 1.0 };
                let b = p.beta;
                let pow_part = p.scale
                    * l.powf(b - 1.0)
                    * beta(b + 1.0, 1.0 - b)
                    * (beta_reg(b + 1.0, 1.0 - b, ub) - beta_reg(b + 1.0, 1.0 - b, ua));
                let hi_term = if p.hi.is_finite() { 1.0 / (l + p.hi) } else { 0.0 };
                pow_part + p.offset * (1.0 / (l + p.lo) - hi_term)
            })
            .sum()
    }

    /// mu(t) by incomplete gamma: ∫ K b s^b e^{-st} ds over each piece.
    fn mu_oracle(s: &PiecewiseSchedule, t: f64) -> f64 {
        s.pieces
            .iter()
            .map(|p| {
                let a = p.beta + 1.0;
                let up = if p.hi.is_finite() { gamma_lr(a, t * p.hi) } else { 1.0 };
                let down = if p.lo > 0.0 { gamma_lr(a, t * p.lo) } else { 0.0 };
                p.scale * p.beta * t.powf(-a) * gamma(a) * (up - down)
            })
            .sum()
    }

    #[test]
    fn single_piece_is_square_root() {
        let s = section6_build_f(1, 0.05, Continuity::Additive).unwrap();
        assert_eq!(s.pieces.len(), 1);
        assert_eq!(s.f(1.0), 1.0);
        assert!((s.f(9.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn additive_continuity_at_two() {
        let s = section6_build_f(3, 0.05, Continuity::Additive).unwrap();
        let right = s.pieces[1].f(2.0);
        assert!((right - (2f64.powf(1.0 / 3.0) + 2f64.sqrt() - 2f64.powf(1.0 / 3.0))).abs() < 1e-15);
        assert!((right - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn four_piece_breakpoints() {
        let s = section6_build_f(4, 0.05, Continuity::Multiplicative).unwrap();
        let bps = s.breakpoints();
        assert_eq!(bps, vec![2.0, 100.0, 1e5]);
        assert_eq!(s.settle, Some(1e12));
        let a1 = bps[1];
        assert!(a1 >= 20.0);
        // the rule is evaluated on the additive piece formula
        let add = section6_build_f(4, 0.05, Continuity::Additive).unwrap();
        let p = add.pieces[1];
        let ratio = p.f(2.0 * a1) / p.f(a1);
        assert!((ratio - 2f64.powf(1.0 / 3.0)).abs() <= 0.05, "{ratio}");
        for k in 1..add.pieces.len() {
            assert!(add.closeness_error(k) <= 0.05 + 1e-12, "piece {k}");
        }
    }

    #[test]
    fn tiny_epsilon_hits_the_cap() {
        assert!(matches!(
            section6_build_f(12, 1e-9, Continuity::Additive),
            Err(Error::Schedule(_))
        ));
    }

    #[test]
    fn degenerate_g_closed_form() {
        let s = PiecewiseSchedule::degenerate();
        let g1 = stieltjes_g(&s, 1.0, &spec()).unwrap();
        assert!((g1 - PI / 2.0).abs() < 1e-8, "{g1}");
        let g4 = stieltjes_g(&s, 4.0, &spec()).unwrap();
        assert!((g4 - PI / 4.0).abs() < 1e-8);
        for k in -2..=4 {
            let l = 10f64.powi(k);
            let g = stieltjes_g(&s, l, &QuadSpec::with_rel_tol(1e-7)).unwrap();
            assert!((g / (PI / (2.0 * l.sqrt())) - 1.0).abs() < 1e-5, "{l}");
        }
        let phi1 = section6_phi(&s, 1.0, &spec()).unwrap();
        assert!((phi1 - PI / 2.0).abs() < 1e-8);
    }

    #[test]
    fn full_schedule_g_matches_incomplete_beta() {
        for cont in [Continuity::Additive, Continuity::Multiplicative] {
            let s = section6_build_f(5, 0.05, cont).unwrap();
            for &l in &[0.01, 1.0, 3.0, 150.0, 4e4, 1e7, 1e11] {
                let q = stieltjes_g(&s, l, &spec()).unwrap();
                let o = g_oracle(&s, l);
                assert!((q / o - 1.0).abs() < 1e-7, "{cont:?} {l}: {q} vs {o}");
            }
        }
    }

    #[test]
    fn g_strictly_decreasing() {
        let s = section6_build_f(4, 0.05, Continuity::Multiplicative).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..60 {
            let l = 10f64.powf(-2.0 + i as f64 * 0.2);
            let g = stieltjes_g(&s, l, &QuadSpec::default()).unwrap();
            assert!(g < prev);
            prev = g;
        }
    }

    #[test]
    fn mu_matches_incomplete_gamma() {
        let s = PiecewiseSchedule::degenerate();
        let m1 = mu_from_stieltjes(&s, 1.0, &spec()).unwrap();
        assert!((m1 - 0.5 * gamma(1.5)).abs() < 1e-8);
        let full = section6_build_f(4, 0.05, Continuity::Multiplicative).unwrap();
        for &t in &[1e-9, 1e-6, 1e-3, 0.02, 1.0, 30.0] {
            let q = mu_from_stieltjes(&full, t, &spec()).unwrap();
            let o = mu_oracle(&full, t);
            assert!((q / o - 1.0).abs() < 1e-7, "{t}: {q} vs {o}");
        }
    }
}
