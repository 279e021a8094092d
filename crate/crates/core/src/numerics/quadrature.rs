//! Adaptive Gauss–Kronrod (10/21 point) quadrature on finite intervals and
//! half lines, plus iterated integration in up to three variables.
//!
//! Integrable power singularities at an endpoint are removed by a power
//! substitution when they are declared in [`SingularEndpoints`]. A half line
//! `[a, inf)` is split at `max(a, 1)` and the tail is mapped to `(0, 1]` by
//! `x = c / s`.

use std::cell::{Cell, RefCell};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Declared power behaviour at the ends of an integration interval.
///
/// An exponent `beta` says the integrand grows like `dist^{-beta}` near a
/// finite endpoint (`beta < 1`), or decays like `x^{-beta}` at an infinite
/// upper limit (`beta > 1`). Only declared behaviour triggers a substitution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SingularEndpoints {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub singular_endpoints: SingularEndpoints,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            singular_endpoints: SingularEndpoints::default(),
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
            singular_endpoints: SingularEndpoints::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0) || !(self.rel_tol >= 0.0) {
            return Err(Error::invalid("quadrature tolerances must be non-negative"));
        }
        if self.abs_tol == 0.0 && self.rel_tol == 0.0 {
            return Err(Error::invalid(
                "at least one quadrature tolerance must be positive",
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions must be at least 1"));
        }
        Ok(())
    }

    pub fn with_singularities(mut self, lower: Option<f64>, upper: Option<f64>) -> Self {
        self.singular_endpoints = SingularEndpoints { lower, upper };
        self
    }

    pub fn regular(self) -> Self {
        self.with_singularities(None, None)
    }

    /// Tighter copy used for inner integrals of iterated quadrature.
    pub(crate) fn tightened(self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: (self.rel_tol * factor).max(1e-14),
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl IntegralResult {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            error_estimate: 0.0,
            evaluations: 0,
        }
    }

    pub fn plus(self, other: IntegralResult) -> Self {
        Self {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            evaluations: self.evaluations + other.evaluations,
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        Self {
            value: self.value * c,
            error_estimate: self.error_estimate * c.abs(),
            evaluations: self.evaluations,
        }
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            if self.error_estimate == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.error_estimate / self.value.abs()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    floor: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

struct NonFinite(f64);

/// Returns (value, error, roundoff floor of the error).
fn gauss_kronrod<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
) -> std::result::Result<(f64, f64, f64), NonFinite> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(NonFinite(center));
    }
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = fc.abs() * WGK[10];
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(NonFinite(x1));
        }
        if !f2.is_finite() {
            return Err(NonFinite(x2));
        }
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    Ok((value, err, floor))
}

/// Adaptive bisection on a finite interval; no substitutions.
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_sub: usize,
) -> Result<IntegralResult> {
    if a == b {
        return Ok(IntegralResult::default());
    }
    let non_finite = |x: f64| Error::domain(format!("integrand is not finite at x = {x:e}"));
    let (value, error, floor) = gauss_kronrod(f, a, b).map_err(|NonFinite(x)| non_finite(x))?;
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value,
        error,
        floor,
    });
    let mut total = value;
    let mut total_err = error;
    let mut total_floor = floor;
    let mut pieces = 1;
    loop {
        let tol = abs_tol.max(rel_tol * total.abs());
        // once the estimate is pure roundoff, bisecting cannot reduce it
        if total_err <= tol || total_err <= total_floor * (1.0 + 1e-9) {
            break;
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        if pieces >= max_sub || mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            heap.push(worst);
            let best = summed(&heap, evaluations);
            let reason = if pieces >= max_sub {
                format!("{pieces} subdivisions exhausted")
            } else {
                "interval width hit machine precision".to_string()
            };
            return Err(Error::Accuracy { reason, best });
        }
        let (v1, e1, f1) = gauss_kronrod(f, worst.a, mid).map_err(|NonFinite(x)| non_finite(x))?;
        let (v2, e2, f2) = gauss_kronrod(f, mid, worst.b).map_err(|NonFinite(x)| non_finite(x))?;
        evaluations += 42;
        pieces += 1;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        total_floor += f1 + f2 - worst.floor;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            floor: f1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            floor: f2,
        });
        if pieces % 64 == 0 {
            // refresh running sums to stop drift
            let s = summed(&heap, evaluations);
            total = s.value;
            total_err = s.error_estimate;
            total_floor = heap.iter().map(|s| s.floor).sum();
        }
    }
    Ok(summed(&heap, evaluations))
}

fn summed(heap: &BinaryHeap<Segment>, evaluations: usize) -> IntegralResult {
    let mut segs: Vec<&Segment> = heap.iter().collect();
    // fixed summation order keeps results independent of heap layout
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    IntegralResult {
        value: segs.iter().map(|s| s.value).sum(),
        error_estimate: segs.iter().map(|s| s.error).sum(),
        evaluations,
    }
}

fn check_exponent(beta: Option<f64>, what: &str) -> Result<Option<f64>> {
    match beta {
        Some(b) if !b.is_finite() => Err(Error::invalid(format!("{what} exponent must be finite"))),
        Some(b) if b >= 1.0 => Err(Error::invalid(format!(
            "{what} singularity of order {b} is not integrable"
        ))),
        Some(b) if b > 0.0 => Ok(Some(b)),
        _ => Ok(None),
    }
}

/// Smallest `u` whose image `c +- h u^k` is distinct from `c` and within
/// `SPAN` decades of `h`; closer points would overflow typical power laws.
fn clamp_floor(c: f64, h: f64, k: f64) -> f64 {
    let gap = (c.abs() * 4.0 * f64::EPSILON).max(h / SPAN);
    (gap / h).powf(1.0 / k)
}

/// Finite interval with optional endpoint power singularities.
fn finite_interval<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
    abs_tol: f64,
) -> Result<IntegralResult> {
    let lower = check_exponent(spec.singular_endpoints.lower, "lower endpoint")?;
    let upper = check_exponent(spec.singular_endpoints.upper, "upper endpoint")?;
    let (rel, max) = (spec.rel_tol, spec.max_subdivisions);
    match (lower, upper) {
        (None, None) => adaptive(f, a, b, abs_tol, rel, max),
        (Some(bl), None) => {
            let (h, k) = (b - a, 1.0 / (1.0 - bl));
            let u_floor = clamp_floor(a, h, k);
            let g = |u: f64| {
                // the substitution makes the integrand flat in u near 0, so
                // points too close to `a` to represent reuse the last one
                let u = u.max(u_floor);
                let uk = u.powf(k);
                f(a + h * uk) * h * k * uk / u
            };
            adaptive(&g, 0.0, 1.0, abs_tol, rel, max)
        }
        (None, Some(bu)) => {
            let (h, k) = (b - a, 1.0 / (1.0 - bu));
            let u_floor = clamp_floor(b, h, k);
            let g = |u: f64| {
                let u = u.max(u_floor);
                let uk = u.powf(k);
                f(b - h * uk) * h * k * uk / u
            };
            adaptive(&g, 0.0, 1.0, abs_tol, rel, max)
        }
        (Some(_), Some(_)) => {
            let mid = 0.5 * (a + b);
            let left = spec.with_singularities(spec.singular_endpoints.lower, None);
            let right = spec.with_singularities(None, spec.singular_endpoints.upper);
            let l = finite_interval(f, a, mid, &left, 0.5 * abs_tol)?;
            let r = finite_interval(f, mid, b, &right, 0.5 * abs_tol)?;
            Ok(l.plus(r))
        }
    }
}

// Substituted ends are sampled within this factor of the interval scale and
// extrapolated by the declared power law beyond it.
const SPAN: f64 = 1e30;

/// `int_c^inf f` through `x = c u^{-k}`, where `k` flattens a declared decay.
fn tail_interval<F: Fn(f64) -> f64>(
    f: &F,
    c: f64,
    decay: Option<f64>,
    spec: &QuadratureSpec,
    abs_tol: f64,
) -> Result<IntegralResult> {
    let k = match decay {
        Some(d) if !d.is_finite() || d <= 1.0 => {
            return Err(Error::invalid(format!(
                "decay x^-{d} is not integrable at infinity"
            )));
        }
        // mapped integrand behaves like s^{d-2}
        Some(d) if d < 2.0 => 1.0 / (d - 1.0),
        _ => 1.0,
    };
    // mapped integrand ~ u^{k(d-1)-1}; zero once the decay is flattened
    let tail_exponent = k * (decay.unwrap_or(2.0) - 1.0) - 1.0;
    let u_cap = SPAN.powf(-1.0 / k);
    let g = |u: f64| {
        // beyond c * SPAN the declared power law stands in for f
        let (v, scale) = if u < u_cap {
            (u_cap, (u / u_cap).powf(tail_exponent))
        } else {
            (u, 1.0)
        };
        let x = c * v.powf(-k);
        let fx = f(x);
        if fx == 0.0 {
            0.0
        } else {
            fx * x * k / v * scale
        }
    };
    adaptive(&g, 0.0, 1.0, abs_tol, spec.rel_tol, spec.max_subdivisions)
}

/// Integrate `f` over `[a, b]`, `b` possibly `+inf`.
pub fn integrate_1d<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    spec.validate()?;
    if a.is_nan() || b.is_nan() || a == f64::NEG_INFINITY || a == f64::INFINITY {
        return Err(Error::invalid(format!("unsupported interval [{a}, {b}]")));
    }
    if b < a {
        return Err(Error::invalid(format!("interval [{a}, {b}] is reversed")));
    }
    if b.is_finite() {
        return finite_interval(&f, a, b, spec, spec.abs_tol);
    }
    let split = a.max(1.0);
    let decay = spec.singular_endpoints.upper;
    if split > a {
        let head_spec = spec.with_singularities(spec.singular_endpoints.lower, None);
        let head = finite_interval(&f, a, split, &head_spec, 0.5 * spec.abs_tol);
        let tail = tail_interval(&f, split, decay, spec, 0.5 * spec.abs_tol);
        match (head, tail) {
            (Ok(h), Ok(t)) => Ok(h.plus(t)),
            (Err(Error::Accuracy { reason, best }), Ok(t))
            | (Ok(t), Err(Error::Accuracy { reason, best })) => Err(Error::Accuracy {
                reason,
                best: best.plus(t),
            }),
            (Err(e), _) | (_, Err(e)) => Err(e),
        }
    } else {
        tail_interval(&f, split, decay, spec, spec.abs_tol)
    }
}

/// Integrate over `[a, b]` split at interior `breakpoints` (kinks or jumps).
///
/// Declared singularities apply to the outermost endpoints only.
pub fn integrate_pieces<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    if cuts.is_empty() {
        return integrate_1d(f, a, b, spec);
    }
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);
    let pieces = edges.len() - 1;
    let piece_abs = spec.abs_tol / pieces as f64;
    let mut total = IntegralResult::default();
    let mut failure: Option<String> = None;
    for i in 0..pieces {
        let lower = if i == 0 {
            spec.singular_endpoints.lower
        } else {
            None
        };
        let upper = if i == pieces - 1 {
            spec.singular_endpoints.upper
        } else {
            None
        };
        let piece_spec = QuadratureSpec {
            abs_tol: piece_abs,
            ..spec.with_singularities(lower, upper)
        };
        match integrate_1d(&f, edges[i], edges[i + 1], &piece_spec) {
            Ok(r) => total = total.plus(r),
            Err(Error::Accuracy { reason, best }) => {
                total = total.plus(best);
                failure.get_or_insert(reason);
            }
            Err(e) => return Err(e),
        }
    }
    match failure {
        None => Ok(total),
        Some(reason) => Err(Error::Accuracy {
            reason,
            best: total,
        }),
    }
}

/// One coordinate of an iterated integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedDim {
    pub lower: f64,
    pub upper: f64,
    pub singular: SingularEndpoints,
}

impl NestedDim {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            singular: SingularEndpoints::default(),
        }
    }

    pub fn with_singularities(mut self, lower: Option<f64>, upper: Option<f64>) -> Self {
        self.singular = SingularEndpoints { lower, upper };
        self
    }
}

pub const MAX_NESTED_DIMS: usize = 3;

struct NestedState {
    evaluations: Cell<usize>,
    worst_inner_rel: Cell<f64>,
    failure: RefCell<Option<Error>>,
}

fn nested_level<F: Fn(&[f64]) -> f64>(
    f: &F,
    dims: &[NestedDim],
    level: usize,
    prefix: [f64; MAX_NESTED_DIMS],
    spec: &QuadratureSpec,
    state: &NestedState,
) -> Result<IntegralResult> {
    let m = dims.len();
    let d = dims[level];
    let level_spec = spec.with_singularities(d.singular.lower, d.singular.upper);
    if level + 1 == m {
        let g = |x: f64| {
            let mut p = prefix;
            p[level] = x;
            f(&p[..m])
        };
        return integrate_1d(g, d.lower, d.upper, &level_spec);
    }
    let inner_spec = spec.tightened(0.1);
    let g = |x: f64| {
        let mut p = prefix;
        p[level] = x;
        match nested_level(f, dims, level + 1, p, &inner_spec, state) {
            Ok(r) => {
                state
                    .evaluations
                    .set(state.evaluations.get() + r.evaluations);
                let rel = r.relative_error();
                if rel.is_finite() && rel > state.worst_inner_rel.get() {
                    state.worst_inner_rel.set(rel);
                }
                r.value
            }
            Err(e) => {
                let fallback = match &e {
                    Error::Accuracy { best, .. } => best.value,
                    _ => 0.0,
                };
                state.failure.borrow_mut().get_or_insert(e);
                fallback
            }
        }
    };
    integrate_1d(g, d.lower, d.upper, &level_spec)
}

/// Iterated integral over the box described by `dims` (1 to 3 coordinates).
///
/// Inner integrals run at a tenth of the outer tolerance; the reported error
/// adds the outer estimate and the worst inner relative error times `|value|`.
pub fn integrate_nested<F: Fn(&[f64]) -> f64>(
    f: F,
    dims: &[NestedDim],
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    spec.validate()?;
    if dims.is_empty() || dims.len() > MAX_NESTED_DIMS {
        return Err(Error::Unsupported(format!(
            "iterated quadrature handles 1..={MAX_NESTED_DIMS} dimensions, got {}",
            dims.len()
        )));
    }
    let state = NestedState {
        evaluations: Cell::new(0),
        worst_inner_rel: Cell::new(0.0),
        failure: RefCell::new(None),
    };
    let outer = nested_level(&f, dims, 0, [0.0; MAX_NESTED_DIMS], spec, &state)?;
    if let Some(e) = state.failure.into_inner() {
        return Err(e);
    }
    let inner_evals = state.evaluations.get();
    Ok(IntegralResult {
        value: outer.value,
        error_estimate: outer.error_estimate + state.worst_inner_rel.get() * outer.value.abs(),
        evaluations: if dims.len() == 1 {
            outer.evaluations
        } else {
            inner_evals
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn close(r: &IntegralResult, exact: f64, tol: f64) {
        assert!(
            ((r.value - exact) / exact).abs() < tol,
            "got {} want {}",
            r.value,
            exact
        );
    }

    #[test]
    fn kronrod_tables_are_exact_for_polynomials() {
        // degree 31 for Kronrod, degree 19 for the embedded Gauss rule
        for deg in (0..=30).step_by(2) {
            let k: f64 = WGK[10] * if deg == 0 { 1.0 } else { 0.0 }
                + 2.0 * (0..10).map(|j| WGK[j] * XGK[j].powi(deg)).sum::<f64>();
            let exact = 2.0 / (deg as f64 + 1.0);
            assert!((k - exact).abs() < 1e-14, "kronrod deg {deg}");
            if deg <= 18 {
                let g: f64 = 2.0
                    * (0..5)
                        .map(|i| WG[i] * XGK[2 * i + 1].powi(deg))
                        .sum::<f64>();
                assert!((g - exact).abs() < 1e-14, "gauss deg {deg}");
            }
        }
    }

    #[test]
    fn polynomial_on_unit_interval() {
        close(
            &integrate_1d(|r| r.powi(3), 0.0, 1.0, &spec()).unwrap(),
            0.25,
            1e-14,
        );
    }

    #[test]
    fn arctangent_reduction_on_half_line() {
        // int_0^inf r / (1 + r^4) dr = pi / 4
        let r = integrate_1d(
            |r| r / (1.0 + r.powi(4)),
            0.0,
            f64::INFINITY,
            &spec().with_singularities(None, Some(3.0)),
        )
        .unwrap();
        close(&r, PI / 4.0, 1e-10);
        // undeclared tail also works
        let r = integrate_1d(|r| r / (1.0 + r.powi(4)), 0.0, f64::INFINITY, &spec()).unwrap();
        close(&r, PI / 4.0, 1e-10);
    }

    #[test]
    fn beta_integral_with_declared_singularity() {
        // int_0^inf t^{-1/2} (1+t)^{-2} dt = B(1/2, 3/2) = pi / 2
        let s = spec().with_singularities(Some(0.5), Some(2.5));
        let r = integrate_1d(|t| t.powf(-0.5) / (1.0 + t).powi(2), 0.0, f64::INFINITY, &s).unwrap();
        close(&r, PI / 2.0, 1e-10);
        assert!(r.error_estimate >= 0.0);
    }

    #[test]
    fn slowly_decaying_tail() {
        // int_1^inf x^{-1.02} dx = 50; most of the mass sits beyond 1e100
        let s = spec().with_singularities(None, Some(1.02));
        let r = integrate_1d(|x| x.powf(-1.02), 1.0, f64::INFINITY, &s).unwrap();
        close(&r, 50.0, 1e-10);
        // and the mirror image at the origin: int_0^1 x^{-0.98} dx = 50
        let s = spec().with_singularities(Some(0.98), None);
        let r = integrate_1d(|x| x.powf(-0.98), 0.0, 1.0, &s).unwrap();
        close(&r, 50.0, 1e-10);
    }

    #[test]
    fn both_endpoints_singular() {
        // int_0^1 x^{-0.3} (1-x)^{-0.6} dx = B(0.7, 0.4)
        let s = spec().with_singularities(Some(0.3), Some(0.6));
        let r = integrate_1d(|x| x.powf(-0.3) * (1.0 - x).powf(-0.6), 0.0, 1.0, &s).unwrap();
        let exact = crate::numerics::special::beta_fn(0.7, 0.4).unwrap();
        close(&r, exact, 1e-10);
    }

    #[test]
    fn breakpoints_handle_jumps() {
        let f = |x: f64| if x < 0.3 { 1.0 } else { 2.0 };
        let r = integrate_pieces(f, 0.0, 1.0, &[0.3], &spec()).unwrap();
        close(&r, 0.3 + 1.4, 1e-13);
    }

    #[test]
    fn nonconvergence_reports_best_estimate() {
        let s = QuadratureSpec::new(0.0, 1e-12, 3).unwrap();
        match integrate_1d(|x| x.powf(-0.9), 0.0, 1.0, &s) {
            Err(Error::Accuracy { best, .. }) => assert!(best.value > 0.0),
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_specs_and_intervals() {
        assert!(QuadratureSpec::new(0.0, 0.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-8, 0.0, 0).is_err());
        assert!(integrate_1d(|x| x, 1.0, 0.0, &spec()).is_err());
        let s = spec().with_singularities(Some(1.0), None);
        assert!(integrate_1d(|x| 1.0 / x, 0.0, 1.0, &s).is_err());
    }

    #[test]
    fn zero_integrand_is_exact() {
        let r = integrate_1d(|_| 0.0, 0.0, f64::INFINITY, &spec()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.error_estimate, 0.0);
    }

    #[test]
    fn nested_examples() {
        let s = spec();
        // m = 1, (1+t)^{-2} on [0, inf) -> 1
        let d1 = [NestedDim::new(0.0, f64::INFINITY).with_singularities(None, Some(2.0))];
        close(
            &integrate_nested(|x| (1.0 + x[0]).powi(-2), &d1, &s).unwrap(),
            1.0,
            1e-10,
        );
        // I_1(2, 1/2) = pi / 2
        let d1b = [NestedDim::new(0.0, f64::INFINITY).with_singularities(Some(0.5), Some(2.5))];
        close(
            &integrate_nested(|x| x[0].powf(-0.5) * (1.0 + x[0]).powi(-2), &d1b, &s).unwrap(),
            PI / 2.0,
            1e-10,
        );
        // I_2(3, 1/2, 1/2) = Gamma(1/2)^2 Gamma(1) / Gamma(3) = pi / 2
        let d2 = [
            NestedDim::new(0.0, f64::INFINITY).with_singularities(Some(0.5), Some(2.0)),
            NestedDim::new(0.0, f64::INFINITY).with_singularities(Some(0.5), Some(3.5)),
        ];
        let r = integrate_nested(
            |x| (x[0] * x[1]).powf(-0.5) * (1.0 + x[0] + x[1]).powi(-3),
            &d2,
            &s,
        )
        .unwrap();
        close(&r, PI / 2.0, 1e-8);
        assert!(r.error_estimate < 1e-6);
    }

    #[test]
    fn nested_three_dimensional_box() {
        let d = [
            NestedDim::new(0.0, 1.0),
            NestedDim::new(0.0, 2.0),
            NestedDim::new(-1.0, 1.0),
        ];
        let r = integrate_nested(|x| x[0] * x[1] * x[1] + x[2] * x[2], &d, &spec()).unwrap();
        // int x y^2 = 1/2 * 8/3 * 2 = 8/3 ; int z^2 = 1 * 2 * 2/3 = 4/3
        close(&r, 4.0, 1e-12);
    }

    #[test]
    fn nested_rejects_too_many_dims() {
        let d = [NestedDim::new(0.0, 1.0); 4];
        assert!(matches!(
            integrate_nested(|_| 1.0, &d, &spec()),
            Err(Error::Unsupported(_))
        ));
    }
}
