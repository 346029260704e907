//! N-functions, Young's inequality and the Luxemburg / Orlicz norms.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Field, WeightKind, WeightedGrid};

/// Largest argument for which `e^t` is evaluated; beyond it the checked API raises `Overflow`.
pub const EXP_ARG_LIMIT: f64 = 700.0;

/// Constant in `Q(r) <= C |r| ln(1 + |r|)`.
pub const Q_BOUND_CONSTANT: f64 = 3.0;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Which member of a complementary pair to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    P,
    PStar,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::P => Side::PStar,
            Side::PStar => Side::P,
        }
    }
}

/// A complementary pair `(P, P*)` with densities `p = P'` and `p̄ = (P*)'`.
///
/// All four maps are even/odd extensions of their restriction to `[0, ∞)`.
#[derive(Clone)]
pub struct NFunction {
    name: String,
    big_p: ScalarFn,
    small_p: ScalarFn,
    big_pstar: ScalarFn,
    small_pbar: ScalarFn,
    delta2_p: bool,
    delta2_pstar: bool,
    // |t| above which P (resp. P*) is considered unrepresentable
    limit_p: f64,
    limit_pstar: f64,
}

impl fmt::Debug for NFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NFunction")
            .field("name", &self.name)
            .field("delta2_p", &self.delta2_p)
            .field("delta2_pstar", &self.delta2_pstar)
            .finish()
    }
}

fn exp_p(t: f64) -> f64 {
    let a = t.abs();
    if a > EXP_ARG_LIMIT {
        return f64::INFINITY;
    }
    if a < 1e-3 {
        // expm1(a) - a loses digits near 0
        let mut term = a * a / 2.0;
        let mut sum = term;
        for k in 3..12 {
            term *= a / k as f64;
            sum += term;
        }
        sum
    } else {
        a.exp_m1() - a
    }
}

fn exp_density(s: f64) -> f64 {
    let a = s.abs();
    if a > EXP_ARG_LIMIT {
        return f64::INFINITY.copysign(s);
    }
    a.exp_m1().copysign(s)
}

fn exp_pstar(t: f64) -> f64 {
    let a = t.abs();
    if a.is_infinite() {
        return f64::INFINITY;
    }
    if a < 1e-2 {
        // Σ_{k≥2} (-1)^k a^k / (k(k-1))
        let mut pow = a * a;
        let mut sum = 0.0;
        for k in 2..16 {
            let term = pow / (k * (k - 1)) as f64;
            sum += if k % 2 == 0 { term } else { -term };
            pow *= a;
        }
        sum
    } else {
        (a + 1.0) * a.ln_1p() - a
    }
}

fn exp_pbar(s: f64) -> f64 {
    s.abs().ln_1p().copysign(s)
}

impl NFunction {
    /// `P(t) = e^|t| - 1 - |t|`, `P*(t) = (|t|+1) ln(|t|+1) - |t|`.
    pub fn exponential() -> Self {
        NFunction {
            name: "exponential".into(),
            big_p: Arc::new(exp_p),
            small_p: Arc::new(exp_density),
            big_pstar: Arc::new(exp_pstar),
            small_pbar: Arc::new(exp_pbar),
            delta2_p: false,
            delta2_pstar: true,
            limit_p: EXP_ARG_LIMIT,
            limit_pstar: f64::INFINITY,
        }
    }

    /// `N(r) = r²/2`, self-conjugate.
    pub fn quadratic() -> Self {
        NFunction {
            name: "quadratic".into(),
            big_p: Arc::new(|t| 0.5 * t * t),
            small_p: Arc::new(|s| s),
            big_pstar: Arc::new(|t| 0.5 * t * t),
            small_pbar: Arc::new(|s| s),
            delta2_p: true,
            delta2_pstar: true,
            limit_p: f64::INFINITY,
            limit_pstar: f64::INFINITY,
        }
    }

    /// Registers `(P, p)` on `[0, ∞)` and obtains `P*`, `p̄` by a numeric
    /// Legendre transform. `p` must be continuous, increasing, `p(0) = 0`, unbounded.
    pub fn from_primal<F, G>(name: &str, big_p: F, small_p: G, delta2_p: bool, delta2_pstar: bool) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let big_p: ScalarFn = Arc::new(move |t: f64| big_p(t.abs()));
        let small_p: ScalarFn = Arc::new(move |s: f64| small_p(s.abs()).copysign(s));
        let (bp, sp) = (big_p.clone(), small_p.clone());
        let big_pstar: ScalarFn = Arc::new(move |y: f64| {
            let x = legendre_argmax(&*bp, &*sp, y.abs());
            x * y.abs() - bp(x)
        });
        let (bp, sp) = (big_p.clone(), small_p.clone());
        let small_pbar: ScalarFn = Arc::new(move |y: f64| legendre_argmax(&*bp, &*sp, y.abs()).copysign(y));
        NFunction {
            name: name.into(),
            big_p,
            small_p,
            big_pstar,
            small_pbar,
            delta2_p,
            delta2_pstar,
            limit_p: f64::INFINITY,
            limit_pstar: f64::INFINITY,
        }
    }

    /// Same pair with the roles of `P` and `P*` exchanged.
    pub fn conjugate(&self) -> Self {
        NFunction {
            name: format!("{}*", self.name),
            big_p: self.big_pstar.clone(),
            small_p: self.small_pbar.clone(),
            big_pstar: self.big_p.clone(),
            small_pbar: self.small_p.clone(),
            delta2_p: self.delta2_pstar,
            delta2_pstar: self.delta2_p,
            limit_p: self.limit_pstar,
            limit_pstar: self.limit_p,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn satisfies_delta2_p(&self) -> bool {
        self.delta2_p
    }

    pub fn satisfies_delta2_pstar(&self) -> bool {
        self.delta2_pstar
    }

    /// `P(t)`; `+∞` past the representable range.
    pub fn eval_p(&self, t: f64) -> f64 {
        (self.big_p)(t)
    }

    pub fn eval_pstar(&self, t: f64) -> f64 {
        (self.big_pstar)(t)
    }

    pub fn density_p(&self, s: f64) -> f64 {
        (self.small_p)(s)
    }

    pub fn density_pbar(&self, s: f64) -> f64 {
        (self.small_pbar)(s)
    }

    /// `P(t)`, raising `Overflow` instead of returning `∞`.
    pub fn try_eval_p(&self, t: f64) -> Result<f64> {
        if t.abs() > self.limit_p {
            return Err(Error::Overflow(format!("P({t}) exceeds the representable range")));
        }
        Ok(self.eval_p(t))
    }

    pub fn eval(&self, side: Side, t: f64) -> f64 {
        match side {
            Side::P => self.eval_p(t),
            Side::PStar => self.eval_pstar(t),
        }
    }

    pub fn density(&self, side: Side, s: f64) -> f64 {
        match side {
            Side::P => self.density_p(s),
            Side::PStar => self.density_pbar(s),
        }
    }

    fn limit(&self, side: Side) -> f64 {
        match side {
            Side::P => self.limit_p,
            Side::PStar => self.limit_pstar,
        }
    }

    /// `P(x) + P*(y) - xy`.
    pub fn young_gap(&self, x: f64, y: f64) -> f64 {
        self.eval_p(x) + self.eval_pstar(y) - x * y
    }
}

/// Maximizer of `x ↦ x y - P(x)` on `[0, ∞)` for `y >= 0`.
fn legendre_argmax(big_p: &dyn Fn(f64) -> f64, small_p: &dyn Fn(f64) -> f64, y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    let mut guard = 0;
    while small_p(hi) < y && guard < 2000 {
        hi *= 2.0;
        guard += 1;
    }
    let mut lo = 0.0;
    // golden section on the concave objective
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let obj = |x: f64| x * y - big_p(x);
    let mut a = lo + (1.0 - inv_phi) * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (obj(a), obj(b));
    for _ in 0..300 {
        if hi - lo <= 1e-14 * (1.0 + hi) {
            break;
        }
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = obj(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = lo + (1.0 - inv_phi) * (hi - lo);
            fa = obj(a);
        }
    }
    0.5 * (lo + hi)
}

/// Young gap for the exponential pair.
pub fn young_gap(x: f64, y: f64) -> f64 {
    exp_p(x) + exp_pstar(y) - x * y
}

/// `Q(r) = (|r| + 1/2) ln(2|r| + 1) - |r|`.
pub fn q_function(r: f64) -> f64 {
    let a = r.abs();
    if a < 1e-4 {
        // (a + 1/2) ln(1 + 2a) - a = a² - 2a³/3 + 2a⁴/3 - ...
        return a * a - 2.0 * a * a * a / 3.0 + 2.0 * a.powi(4) / 3.0;
    }
    (a + 0.5) * (2.0 * a).ln_1p() - a
}

/// `(|a| ln(1+|a|)/2, P*(a), |a| ln(1+|a|))` for the exponential pair.
pub fn pstar_sandwich(a: f64) -> (f64, f64, f64) {
    let hi = a.abs() * a.abs().ln_1p();
    (0.5 * hi, exp_pstar(a), hi)
}

/// Field values paired with the measure they are integrated against.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedField {
    pub values: Field,
    pub weight_kind: WeightKind,
}

impl WeightedField {
    pub fn new(values: impl Into<Field>, weight_kind: WeightKind) -> Self {
        WeightedField { values: values.into(), weight_kind }
    }

    fn validated_weights(&self, grid: &WeightedGrid) -> Result<Vec<f64>> {
        grid.check_field(&self.values)?;
        if !self.values.is_finite() {
            return Err(Error::Overflow("field has non-finite entries".into()));
        }
        Ok(grid.weights(self.weight_kind))
    }
}

fn modular(values: &[f64], weights: &[f64], n: &NFunction, side: Side, k: f64) -> f64 {
    let mut s = 0.0;
    for (v, w) in values.iter().zip(weights) {
        if *w == 0.0 || *v == 0.0 {
            continue;
        }
        s += n.eval(side, v / k) * w;
        if !s.is_finite() {
            return f64::INFINITY;
        }
    }
    s
}

fn check_slices(values: &[f64], weights: &[f64]) -> Result<()> {
    if values.len() != weights.len() {
        return Err(Error::GridMismatch(format!("{} values vs {} weights", values.len(), weights.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow("field has non-finite entries".into()));
    }
    Ok(())
}

/// `inf { k > 0 : Σ N(v_i / k) w_i <= 1 }` for explicit quadrature weights.
pub fn luxemburg_norm_weighted(values: &[f64], weights: &[f64], n: &NFunction, side: Side) -> Result<f64> {
    check_slices(values, weights)?;
    let max = values
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > 0.0)
        .fold(0.0_f64, |m, (v, _)| m.max(v.abs()));
    if max == 0.0 {
        return Ok(0.0);
    }
    let total: f64 = weights.iter().sum();
    let mut hi = max * total.max(1.0);
    let phi = |k: f64| modular(values, weights, n, side, k);
    if !phi(hi).is_finite() {
        return Err(Error::Overflow(format!(
            "modular not finite at k = {hi:e} (max |f| = {max:e}); rescale the field"
        )));
    }
    let mut guard = 0;
    while phi(hi) > 1.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 2000 {
            return Err(Error::Overflow("upper bracket expansion failed".into()));
        }
    }
    let mut lo = hi * 2f64.powi(-60);
    guard = 0;
    while phi(lo) <= 1.0 {
        lo *= 2f64.powi(-60);
        guard += 1;
        if guard > 20 || lo == 0.0 {
            return Ok(hi.min(lo.max(f64::MIN_POSITIVE)));
        }
    }
    for _ in 0..200 {
        if (hi - lo) <= 1e-12 * hi {
            break;
        }
        let mid = (lo * hi).sqrt();
        let mid = if mid > lo && mid < hi { mid } else { 0.5 * (lo + hi) };
        if phi(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Newton polish on Φ(k) = 1 inside the bracket
    let mut k = 0.5 * (lo + hi);
    for _ in 0..3 {
        let f = phi(k) - 1.0;
        let mut d = 0.0;
        for (v, w) in values.iter().zip(weights) {
            if *w == 0.0 || *v == 0.0 {
                continue;
            }
            let t = v / k;
            d -= t * n.density(side, t) * w / k;
        }
        if !(d < 0.0) || !f.is_finite() {
            break;
        }
        let next = k - f / d;
        if !(next >= lo && next <= hi) {
            break;
        }
        k = next;
    }
    Ok(k)
}

/// Gradient of the Luxemburg norm with respect to the nodal values.
pub fn luxemburg_subgradient_weighted(values: &[f64], weights: &[f64], n: &NFunction, side: Side) -> Result<Vec<f64>> {
    let k = luxemburg_norm_weighted(values, weights, n, side)?;
    if k == 0.0 {
        return Err(Error::ZeroField);
    }
    let d: Vec<f64> = values.iter().zip(weights).map(|(v, w)| w * n.density(side, v / k)).collect();
    let denom: f64 = values.iter().zip(&d).map(|(v, di)| v / k * di).sum();
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::Overflow("degenerate subgradient normalization".into()));
    }
    Ok(d.into_iter().map(|di| di / denom).collect())
}

/// Orlicz (Amemiya) norm `inf_k (1 + Σ N(k g_i) w_i) / k` of `g` in the space
/// generated by `N = n.side`. Paired with the Luxemburg norm of the
/// complementary function it gives Hölder's inequality with constant 1.
///
/// Returns `(norm, k*)`.
fn orlicz_norm_and_scale(values: &[f64], weights: &[f64], n: &NFunction, side: Side) -> Result<(f64, f64)> {
    check_slices(values, weights)?;
    let max = values
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > 0.0)
        .fold(0.0_f64, |m, (v, _)| m.max(v.abs()));
    if max == 0.0 {
        return Ok((0.0, 0.0));
    }
    let conj = side.other();
    let limit = n.limit(side);
    // the maximizing dual field is N'(k g); Ψ(k) = Σ N*(N'(k g)) w increases from 0 to ∞ and the optimal k solves Ψ = 1
    let psi = |k: f64| -> f64 {
        let mut s = 0.0;
        for (g, w) in values.iter().zip(weights) {
            if *w == 0.0 || *g == 0.0 {
                continue;
            }
            let t = k * g;
            if t.abs() > limit {
                return f64::INFINITY;
            }
            s += n.eval(conj, n.density(side, t)) * w;
        }
        s
    };
    let mut hi = 1.0 / max;
    let mut guard = 0;
    while psi(hi) < 1.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 2000 {
            return Err(Error::Overflow("Orlicz norm bracket expansion failed".into()));
        }
    }
    let mut lo = hi * 0.5;
    guard = 0;
    while psi(lo) >= 1.0 {
        lo *= 0.5;
        guard += 1;
        if guard > 2000 {
            return Err(Error::Overflow("Orlicz norm bracket contraction failed".into()));
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if psi(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = 0.5 * (lo + hi);
    // at the stationary point the Amemiya value equals Σ g N'(k g) w
    let norm: f64 = values
        .iter()
        .zip(weights)
        .map(|(g, w)| if *w == 0.0 { 0.0 } else { g * n.density(side, k * g) * w })
        .sum();
    if !norm.is_finite() {
        return Err(Error::Overflow("Orlicz norm not finite".into()));
    }
    Ok((norm, k))
}

/// `(‖g‖, k*)`: Orlicz norm and the minimizing scale of the Amemiya formula.
pub fn orlicz_norm_with_scale(values: &[f64], weights: &[f64], n: &NFunction, side: Side) -> Result<(f64, f64)> {
    orlicz_norm_and_scale(values, weights, n, side)
}

pub fn orlicz_norm_weighted(values: &[f64], weights: &[f64], n: &NFunction, side: Side) -> Result<f64> {
    orlicz_norm_and_scale(values, weights, n, side).map(|(v, _)| v)
}

/// Gradient `N'(k* g_i) w_i` of the Orlicz norm.
pub fn orlicz_subgradient_weighted(values: &[f64], weights: &[f64], n: &NFunction, side: Side) -> Result<Vec<f64>> {
    let (norm, k) = orlicz_norm_and_scale(values, weights, n, side)?;
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(values.iter().zip(weights).map(|(g, w)| n.density(side, k * g) * w).collect())
}

pub fn luxemburg_norm(f: &WeightedField, grid: &WeightedGrid, n: &NFunction, side: Side) -> Result<f64> {
    let w = f.validated_weights(grid)?;
    luxemburg_norm_weighted(&f.values, &w, n, side)
}

pub fn luxemburg_subgradient(f: &WeightedField, grid: &WeightedGrid, n: &NFunction, side: Side) -> Result<WeightedField> {
    let w = f.validated_weights(grid)?;
    let g = luxemburg_subgradient_weighted(&f.values, &w, n, side)?;
    Ok(WeightedField::new(g, f.weight_kind))
}

pub fn orlicz_norm(f: &WeightedField, grid: &WeightedGrid, n: &NFunction, side: Side) -> Result<f64> {
    let w = f.validated_weights(grid)?;
    orlicz_norm_weighted(&f.values, &w, n, side)
}

pub fn orlicz_subgradient(f: &WeightedField, grid: &WeightedGrid, n: &NFunction, side: Side) -> Result<WeightedField> {
    let w = f.validated_weights(grid)?;
    let g = orlicz_subgradient_weighted(&f.values, &w, n, side)?;
    Ok(WeightedField::new(g, f.weight_kind))
}

/// `(|∫ f g w|, ‖f‖_P ‖g‖_(P*))` with the Luxemburg norm on `f` and the Orlicz
/// norm on `g`.
pub fn holder_young_pairing_with(
    f: &WeightedField,
    g: &WeightedField,
    grid: &WeightedGrid,
    n: &NFunction,
) -> Result<(f64, f64)> {
    if f.weight_kind != g.weight_kind {
        return Err(Error::GridMismatch(format!("weight kinds differ: {} vs {}", f.weight_kind, g.weight_kind)));
    }
    grid.check_field(&f.values)?;
    grid.check_field(&g.values)?;
    let w = grid.weights(f.weight_kind);
    let lhs = f.values.iter().zip(g.values.iter()).zip(&w).map(|((a, b), wi)| a * b * wi).sum::<f64>().abs();
    let nf = luxemburg_norm_weighted(&f.values, &w, n, Side::P)?;
    let ng = orlicz_norm_weighted(&g.values, &w, n, Side::PStar)?;
    Ok((lhs, nf * ng))
}

/// Hölder–Young pairing for the exponential pair.
pub fn holder_young_pairing(f: &WeightedField, g: &WeightedField, grid: &WeightedGrid) -> Result<(f64, f64)> {
    holder_young_pairing_with(f, g, grid, &NFunction::exponential())
}
