//! Closed subintervals of `[0,1]` as points of the filled triangle
//! `T = {(a, b) : 0 ≤ a ≤ b ≤ 1}` with the maximum metric, and an operator on
//! compact subsets of `[0,1]` that attracts everything to `[0,1]` without
//! being stable.
//!
//! Geometry. In the coordinates `u = a`, `v = 1 − b` the triangle is the
//! simplex `u, v ≥ 0, u + v ≤ 1` with the full interval `A = [0,1]` at the
//! origin. Write `s = u + v` and `t = v / s`. The leaf through `p ≠ A` has
//! index `α(p) = max(s, |2t − 1|) ∈ (0, 1]`; it is the boundary of the
//! triangle with corners `A`, `P⁻ = α(1 − t⁻, t⁻)`, `P⁺ = α(1 − t⁺, t⁺)`
//! where `t∓ = (1 ∓ α)/2`. Distinct leaves meet only at `A`, the outer leaf
//! is `∂T`, and together they cover `T`.
//!
//! Each leaf is a topological circle. It is parameterised by normalised
//! Euclidean arc length `σ ∈ [0, 1)` starting at `A`, running out along
//! `A → P⁻`, across `P⁻ → P⁺` and back along `P⁺ → A`, and identified with
//! the angle `θ = π + 2πσ`, so that `A` sits at the pole `θ = π`. `G` moves
//! each point along its own leaf by the translation `x ↦ x + 1` read through
//! `x = tan(θ/2)`.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{HyperspaceOperator, OperatorOrigin};
use crate::error::{invalid, Result};
use crate::hyperspace::{collect_snapped, CompactSet};
use crate::metric_space::{normalize_angle, Space};

/// The point `(a, b)` of the triangle, i.e. the interval `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalPoint {
    pub a: f64,
    pub b: f64,
}

/// The full interval `[0, 1]`, the common point of all leaves.
pub const POLE: IntervalPoint = IntervalPoint { a: 0.0, b: 1.0 };

impl IntervalPoint {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            return invalid(format!("interval [{a}, {b}] is not inside [0, 1]"));
        }
        if a > b {
            return invalid(format!("interval [{a}, {b}] has a > b"));
        }
        Ok(IntervalPoint { a: a + 0.0, b: b + 0.0 })
    }

    pub fn chebyshev(&self, other: &IntervalPoint) -> f64 {
        (self.a - other.a).abs().max((self.b - other.b).abs())
    }

    /// `d_H([a, b], [0, 1])`.
    pub fn distance_to_pole(&self) -> f64 {
        self.a.max(1.0 - self.b)
    }

    fn uv(&self) -> (f64, f64) {
        (self.a, 1.0 - self.b)
    }

    fn from_uv(u: f64, v: f64) -> IntervalPoint {
        let a = u.clamp(0.0, 1.0);
        let b = (1.0 - v).clamp(a, 1.0);
        IntervalPoint { a: a + 0.0, b: b + 0.0 }
    }
}

/// `[a, b] ↦ (a, b)`. An isometry from intervals with `d_H` onto the
/// triangle with the maximum metric.
pub fn interval_embed(a: f64, b: f64) -> Result<IntervalPoint> {
    IntervalPoint::new(a, b)
}

/// `D ↦ [min D, max D]`.
pub fn q_retraction(d: &CompactSet) -> Result<IntervalPoint> {
    if d.width() != 1 || !matches!(d.space(), Space::Euclidean(_) | Space::Chebyshev(_)) {
        return invalid("the retraction acts on subsets of a line");
    }
    let raw = d.raw();
    IntervalPoint::new(raw[0], raw[raw.len() - 1])
}

/// The set `{a, b} ∪ {k·h : a < k·h < b}` representing `[a, b]` at
/// resolution `h`, with exact endpoints.
pub fn interval_net(space: &Arc<Space>, p: IntervalPoint, h: f64) -> Result<CompactSet> {
    if !(h > 0.0) {
        return invalid("interval nets need a positive resolution");
    }
    let mut raw = vec![p.a, p.b];
    let mut k = (p.a / h).floor() as i64;
    loop {
        let x = k as f64 * h;
        if x >= p.b {
            break;
        }
        if x > p.a {
            raw.push(x);
        }
        k += 1;
    }
    Ok(collect_snapped(space, raw, 0.0)?.with_resolution(h))
}

/// The translation `x ↦ x + 1` on the circle, read through `x = tan(θ/2)`.
/// The pole `θ = π` (where `x = ∞`) is fixed.
pub fn projective_translate(theta: f64) -> f64 {
    let theta = normalize_angle(theta);
    if theta == PI {
        return PI;
    }
    let x = (0.5 * theta).tan();
    normalize_angle(2.0 * (x + 1.0).atan())
}

/// Leaf index `α(p)`, or `None` at the pole.
pub fn leaf_index(p: IntervalPoint) -> Option<f64> {
    leaf_coordinates(p).map(|(alpha, _)| alpha)
}

struct Leaf {
    p_minus: (f64, f64),
    p_plus: (f64, f64),
    e1: f64,
    e2: f64,
}

impl Leaf {
    fn new(alpha: f64) -> Leaf {
        let tm = 0.5 * (1.0 - alpha);
        let tp = 0.5 * (1.0 + alpha);
        Leaf {
            p_minus: (alpha * (1.0 - tm), alpha * tm),
            p_plus: (alpha * (1.0 - tp), alpha * tp),
            e1: alpha * (0.5 * (1.0 + alpha * alpha)).sqrt(),
            e2: std::f64::consts::SQRT_2 * alpha * alpha,
        }
    }

    fn length(&self) -> f64 {
        2.0 * self.e1 + self.e2
    }

    fn point(&self, sigma: f64) -> IntervalPoint {
        let arc = sigma.rem_euclid(1.0) * self.length();
        let lerp = |p: (f64, f64), q: (f64, f64), w: f64| {
            IntervalPoint::from_uv(p.0 + w * (q.0 - p.0), p.1 + w * (q.1 - p.1))
        };
        if arc <= self.e1 {
            lerp((0.0, 0.0), self.p_minus, arc / self.e1)
        } else if arc <= self.e1 + self.e2 {
            lerp(self.p_minus, self.p_plus, (arc - self.e1) / self.e2)
        } else {
            lerp(self.p_plus, (0.0, 0.0), (arc - self.e1 - self.e2) / self.e1)
        }
    }
}

/// `(α, σ)` for `p ≠ A`: the leaf index and the normalised arc-length
/// position on that leaf.
pub fn leaf_coordinates(p: IntervalPoint) -> Option<(f64, f64)> {
    let (u, v) = p.uv();
    let s = u + v;
    if s <= 0.0 {
        return None;
    }
    let t = v / s;
    let spread = (2.0 * t - 1.0).abs();
    let alpha = s.max(spread).min(1.0);
    let leaf = Leaf::new(alpha);
    let norm = u.hypot(v);
    let arc = if s >= spread {
        let (du, dv) = (u - leaf.p_minus.0, v - leaf.p_minus.1);
        (leaf.e1 + du.hypot(dv)).min(leaf.e1 + leaf.e2)
    } else if t < 0.5 {
        norm.min(leaf.e1)
    } else {
        leaf.length() - norm.min(leaf.e1)
    };
    Some((alpha, (arc / leaf.length()).rem_euclid(1.0)))
}

/// The point at position `σ` on leaf `α`.
pub fn leaf_point(alpha: f64, sigma: f64) -> Result<IntervalPoint> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return invalid("leaf index must lie in (0, 1]");
    }
    Ok(Leaf::new(alpha).point(sigma))
}

/// One step of `G`: fixes `A` and moves every other point along its leaf.
pub fn g_map(p: IntervalPoint) -> IntervalPoint {
    match leaf_coordinates(p) {
        None => POLE,
        Some((alpha, sigma)) => {
            let theta = normalize_angle(PI + TAU * sigma);
            let next = projective_translate(theta);
            if next == PI {
                return POLE;
            }
            let sigma = ((next - PI) / TAU).rem_euclid(1.0);
            Leaf::new(alpha).point(sigma)
        }
    }
}

/// `F = G ∘ Q` acting on compact subsets of `[0, 1]`: take the enclosing
/// interval, move it by `G`, and return the net of the result. This
/// operator is defined on whole sets and is not induced by a map on points.
#[derive(Debug, Clone)]
pub struct IntervalShiftOperator {
    space: Arc<Space>,
}

impl IntervalShiftOperator {
    pub fn new() -> Self {
        IntervalShiftOperator {
            space: Arc::new(Space::interval(0.0, 1.0).expect("unit interval")),
        }
    }
}

impl Default for IntervalShiftOperator {
    fn default() -> Self {
        Self::new()
    }
}

impl HyperspaceOperator for IntervalShiftOperator {
    fn space(&self) -> &Arc<Space> {
        &self.space
    }

    fn apply(&self, set: &CompactSet, h: f64) -> Result<CompactSet> {
        let p = q_retraction(set)?;
        interval_net(&self.space, g_map(p), h)
    }

    fn origin(&self) -> OperatorOrigin {
        OperatorOrigin::SetLevel
    }

    fn name(&self) -> String {
        "G∘Q on K([0,1])".to_string()
    }
}
