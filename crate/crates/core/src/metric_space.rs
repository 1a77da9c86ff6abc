//! Ambient metric spaces: boxes under the Euclidean or Chebyshev metric and
//! the unit circle under the chordal metric.
//!
//! Points are plain coordinate vectors. Circle points carry a single
//! coordinate, the angle in `[0, 2π)`, even though the circle lives in the
//! plane; [`Space::dimension`] reports the ambient dimension (2) and
//! [`Space::coord_len`] the stored width (1).

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hyperspace::CompactSet;

/// An open ball removed from a box domain. A zero radius removes the single
/// point `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub center: Vec<f64>,
    #[serde(default)]
    pub radius: f64,
}

impl Exclusion {
    pub fn point(center: Vec<f64>) -> Self {
        Exclusion {
            center,
            radius: 0.0,
        }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        Exclusion { center, radius }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<Exclusion>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Euclidean,
    Chebyshev,
    Circle,
}

/// A bounded metric space `(X, d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub enum Space {
    Euclidean(BoxDomain),
    Chebyshev(BoxDomain),
    /// Unit circle in the plane, points stored as angles.
    Circle,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceRepr {
    kind: MetricKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lower: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    upper: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    excluded: Vec<Exclusion>,
}

impl TryFrom<SpaceRepr> for Space {
    type Error = Error;

    fn try_from(r: SpaceRepr) -> Result<Self> {
        match r.kind {
            MetricKind::Circle => {
                if r.lower.is_some() || r.upper.is_some() || !r.excluded.is_empty() {
                    return invalid("the circle takes no bounds or exclusions");
                }
                Ok(Space::Circle)
            }
            kind => {
                let (Some(lower), Some(upper)) = (r.lower, r.upper) else {
                    return invalid("box spaces need `lower` and `upper`");
                };
                Space::new_box(kind, lower, upper, r.excluded)
            }
        }
    }
}

impl From<Space> for SpaceRepr {
    fn from(s: Space) -> Self {
        let kind = s.kind();
        match s {
            Space::Circle => SpaceRepr {
                kind,
                lower: None,
                upper: None,
                excluded: Vec::new(),
            },
            Space::Euclidean(b) | Space::Chebyshev(b) => SpaceRepr {
                kind,
                lower: Some(b.lower),
                upper: Some(b.upper),
                excluded: b.excluded,
            },
        }
    }
}

/// A point of a space. Coordinates are finite; circle angles are normalized
/// to `[0, 2π)` and negative zeros are folded to `+0.0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return invalid("a point needs at least one coordinate");
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return invalid("point coordinates must be finite");
        }
        Ok(Point(coords.into_iter().map(|c| c + 0.0).collect()))
    }

    pub fn scalar(x: f64) -> Result<Self> {
        Point::new(vec![x])
    }

    pub fn angle(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return invalid("angle must be finite");
        }
        Ok(Point(vec![normalize_angle(theta)]))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r + 0.0
    }
}

fn is_lattice_multiple(x: f64, h: f64) -> bool {
    let q = x / h;
    (q - q.round()).abs() < 1e-9
}

impl Space {
    pub fn euclidean(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Space::new_box(MetricKind::Euclidean, lower, upper, Vec::new())
    }

    pub fn chebyshev(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Space::new_box(MetricKind::Chebyshev, lower, upper, Vec::new())
    }

    /// The interval `[lo, hi]` with the usual metric.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Space::euclidean(vec![lo], vec![hi])
    }

    pub fn circle() -> Self {
        Space::Circle
    }

    pub fn new_box(
        kind: MetricKind,
        lower: Vec<f64>,
        upper: Vec<f64>,
        excluded: Vec<Exclusion>,
    ) -> Result<Self> {
        if lower.is_empty() {
            return invalid("dimension must be at least 1");
        }
        if lower.len() != upper.len() {
            return invalid("lower and upper bounds differ in dimension");
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return invalid(format!("axis {i}: need finite lower < upper"));
            }
        }
        let domain = BoxDomain {
            lower,
            upper,
            excluded: Vec::new(),
        };
        let mut space = match kind {
            MetricKind::Euclidean => Space::Euclidean(domain),
            MetricKind::Chebyshev => Space::Chebyshev(domain),
            MetricKind::Circle => return invalid("the circle is not a box space"),
        };
        for ex in excluded {
            space = space.with_exclusion(ex)?;
        }
        Ok(space)
    }

    /// Removes an open ball (or a single point) from a box domain.
    pub fn with_exclusion(mut self, ex: Exclusion) -> Result<Self> {
        let dim = self.dimension();
        let b = match &mut self {
            Space::Circle => return invalid("exclusions are only supported on box domains"),
            Space::Euclidean(b) | Space::Chebyshev(b) => b,
        };
        if ex.center.len() != dim {
            return invalid("exclusion center has the wrong dimension");
        }
        if !(ex.radius >= 0.0) || !ex.radius.is_finite() {
            return invalid("exclusion radius must be finite and nonnegative");
        }
        if ex.radius > 0.0 && dim > 2 {
            return Err(Error::Unsupported(
                "ball exclusions are limited to dimension ≤ 2".into(),
            ));
        }
        for i in 0..dim {
            let c = ex.center[i];
            if !(c - ex.radius > b.lower[i] && c + ex.radius < b.upper[i]) {
                return invalid("excluded regions must lie strictly inside the box");
            }
        }
        b.excluded.push(ex);
        Ok(self)
    }

    pub fn kind(&self) -> MetricKind {
        match self {
            Space::Euclidean(_) => MetricKind::Euclidean,
            Space::Chebyshev(_) => MetricKind::Chebyshev,
            Space::Circle => MetricKind::Circle,
        }
    }

    /// Ambient dimension.
    pub fn dimension(&self) -> usize {
        match self {
            Space::Circle => 2,
            Space::Euclidean(b) | Space::Chebyshev(b) => b.lower.len(),
        }
    }

    /// Number of stored coordinates per point.
    pub fn coord_len(&self) -> usize {
        match self {
            Space::Circle => 1,
            Space::Euclidean(b) | Space::Chebyshev(b) => b.lower.len(),
        }
    }

    pub fn box_domain(&self) -> Option<&BoxDomain> {
        match self {
            Space::Circle => None,
            Space::Euclidean(b) | Space::Chebyshev(b) => Some(b),
        }
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        if p.0.len() != self.coord_len() {
            return invalid(format!(
                "point has {} coordinates, space expects {}",
                p.0.len(),
                self.coord_len()
            ));
        }
        Ok(())
    }

    /// `d(p, q)`.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.dist(&p.0, &q.0))
    }

    /// Distance between raw coordinate slices of the right width. Every
    /// distance kernel in the crate funnels through here so that different
    /// algorithms produce bit-identical values.
    #[inline]
    pub fn dist(&self, p: &[f64], q: &[f64]) -> f64 {
        debug_assert_eq!(p.len(), q.len());
        match self {
            Space::Circle => 2.0 * ((p[0] - q[0]).abs() * 0.5).sin(),
            _ if p.len() == 1 => (p[0] - q[0]).abs(),
            Space::Euclidean(_) => p
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Space::Chebyshev(_) => p
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        }
    }

    pub fn in_domain(&self, p: &Point) -> bool {
        p.0.len() == self.coord_len() && self.contains(&p.0)
    }

    pub(crate) fn contains(&self, p: &[f64]) -> bool {
        if p.iter().any(|c| !c.is_finite()) {
            return false;
        }
        match self {
            Space::Circle => (0.0..TAU).contains(&p[0]),
            Space::Euclidean(b) | Space::Chebyshev(b) => {
                let inside = p
                    .iter()
                    .zip(b.lower.iter().zip(&b.upper))
                    .all(|(x, (lo, hi))| lo <= x && x <= hi);
                inside
                    && !b.excluded.iter().any(|ex| {
                        if ex.radius == 0.0 {
                            ex.center.as_slice() == p
                        } else {
                            self.dist(&ex.center, p) < ex.radius
                        }
                    })
            }
        }
    }

    /// An upper bound on the diameter: the box diagonal, or 2 on the circle.
    pub fn diameter_bound(&self) -> f64 {
        match self {
            Space::Circle => 2.0,
            Space::Euclidean(b) | Space::Chebyshev(b) => self.dist(&b.lower, &b.upper),
        }
    }

    fn circle_lattice(h: f64) -> (usize, f64) {
        let n = ((TAU / h) - 1e-9).ceil().max(1.0) as usize;
        (n, TAU / n as f64)
    }

    /// Lattice coordinate used by snapping on a box axis.
    #[inline]
    fn snap_axis(x: f64, h: f64, lo: f64, hi: f64) -> f64 {
        ((x / h).round() * h).clamp(lo, hi) + 0.0
    }

    /// Rounds `p` to the lattice of cell size `h` (anchored at the origin,
    /// or `n = ⌈2π/h⌉` equal angles on the circle) and appends the result to
    /// `out`. Lattice points that fall in an excluded region are replaced by
    /// the nearest in-domain lattice point.
    pub(crate) fn snap_into(&self, p: &[f64], h: f64, out: &mut Vec<f64>) -> Result<()> {
        match self {
            Space::Circle => {
                let (n, step) = Space::circle_lattice(h);
                let k = ((p[0] / step).round() as usize) % n;
                out.push(k as f64 * step);
                Ok(())
            }
            Space::Euclidean(b) | Space::Chebyshev(b) => {
                let start = out.len();
                out.extend(
                    p.iter()
                        .enumerate()
                        .map(|(i, &x)| Space::snap_axis(x, h, b.lower[i], b.upper[i])),
                );
                if b.excluded.is_empty() || self.contains(&out[start..]) {
                    return Ok(());
                }
                let base: Vec<f64> = out.drain(start..).collect();
                let found = self.nearest_free_lattice_point(p, &base, h, b)?;
                out.extend_from_slice(&found);
                Ok(())
            }
        }
    }

    fn nearest_free_lattice_point(
        &self,
        original: &[f64],
        base: &[f64],
        h: f64,
        b: &BoxDomain,
    ) -> Result<Vec<f64>> {
        const MAX_RING: i64 = 64;
        let dim = base.len();
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut found_ring = None;
        for ring in 1..=MAX_RING {
            if let Some(r) = found_ring {
                if ring > r + 1 {
                    break;
                }
            }
            let width = (2 * ring + 1) as usize;
            let total = width.pow(dim as u32);
            for idx in 0..total {
                let mut rem = idx;
                let mut offs = Vec::with_capacity(dim);
                for _ in 0..dim {
                    offs.push((rem % width) as i64 - ring);
                    rem /= width;
                }
                if offs.iter().map(|o| o.abs()).max() != Some(ring) {
                    continue;
                }
                let cand: Vec<f64> = (0..dim)
                    .map(|i| {
                        Space::snap_axis(base[i] + offs[i] as f64 * h, h, b.lower[i], b.upper[i])
                    })
                    .collect();
                if !self.contains(&cand) {
                    continue;
                }
                let d = self.dist(original, &cand);
                let better = match &best {
                    None => true,
                    Some((bd, bp)) => d < *bd || (d == *bd && lex_cmp(&cand, bp).is_lt()),
                };
                if better {
                    best = Some((d, cand));
                }
                found_ring.get_or_insert(ring);
            }
        }
        best.map(|(_, p)| p).ok_or(Error::EmptyDomain)
    }

    /// Per-axis coordinates of the box net at target resolution `h`.
    fn axis_values(&self, b: &BoxDomain, h: f64) -> Vec<Vec<f64>> {
        let dim = b.lower.len() as f64;
        let spacing = if !b.excluded.is_empty() {
            h / dim.sqrt()
        } else if dim <= 4.0 {
            h
        } else {
            2.0 * h / dim.sqrt()
        };
        b.lower
            .iter()
            .zip(&b.upper)
            .map(|(&lo, &hi)| {
                let aligned = spacing == h
                    && is_lattice_multiple(lo, h)
                    && is_lattice_multiple(hi, h);
                if aligned {
                    let klo = (lo / h).round() as i64;
                    let khi = (hi / h).round() as i64;
                    (klo..=khi)
                        .map(|k| Space::snap_axis(k as f64 * h, h, lo, hi))
                        .collect()
                } else {
                    let len = hi - lo;
                    let n = ((len / spacing) - 1e-9).ceil().max(1.0) as usize;
                    (0..=n)
                        .map(|k| if k == n { hi } else { lo + k as f64 * len / n as f64 })
                        .collect()
                }
            })
            .collect()
    }

    fn exclusion_boundary(&self, ex: &Exclusion, spacing: f64) -> Vec<Vec<f64>> {
        if ex.radius == 0.0 {
            return Vec::new();
        }
        let r = ex.radius * (1.0 + 1e-12);
        match ex.center.len() {
            1 => vec![vec![ex.center[0] - r], vec![ex.center[0] + r]],
            _ => {
                let n = ((8.0 * r / (0.5 * spacing)).ceil() as usize).max(8);
                (0..n)
                    .map(|k| {
                        let phi = TAU * k as f64 / n as f64;
                        let u = [phi.cos(), phi.sin()];
                        let norm = self.dist(&[0.0, 0.0], &u);
                        vec![ex.center[0] + r * u[0] / norm, ex.center[1] + r * u[1] / norm]
                    })
                    .collect()
            }
        }
    }
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// A finite net of the whole domain: every domain point lies within `h` of a
/// net point, and every net point is in the domain.
pub fn grid_net(space: &Arc<Space>, h: f64) -> Result<CompactSet> {
    if !(h > 0.0) || !h.is_finite() {
        return invalid("net resolution must be positive and finite");
    }
    let coords = match space.as_ref() {
        Space::Circle => {
            let (n, step) = Space::circle_lattice(h);
            (0..n).map(|k| k as f64 * step).collect::<Vec<_>>()
        }
        Space::Euclidean(b) | Space::Chebyshev(b) => {
            let axes = space.axis_values(b, h);
            let dim = axes.len();
            let total: usize = axes.iter().map(Vec::len).product();
            let mut coords = Vec::with_capacity(total * dim);
            let mut p = vec![0.0; dim];
            for idx in 0..total {
                let mut rem = idx;
                for (i, axis) in axes.iter().enumerate().rev() {
                    p[i] = axis[rem % axis.len()];
                    rem /= axis.len();
                }
                if space.contains(&p) {
                    coords.extend_from_slice(&p);
                }
            }
            let spacing = axes
                .iter()
                .map(|a| if a.len() > 1 { a[1] - a[0] } else { h })
                .fold(h, f64::min);
            for ex in &b.excluded {
                for q in space.exclusion_boundary(ex, spacing) {
                    if space.contains(&q) {
                        coords.extend_from_slice(&q);
                    }
                }
            }
            coords
        }
    };
    if coords.is_empty() {
        return Err(Error::EmptyDomain);
    }
    CompactSet::from_coords(Arc::clone(space), h, coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let line = Space::interval(0.0, 1.0).unwrap();
        assert_eq!(line.distance(&p(&[0.0]), &p(&[1.0])).unwrap(), 1.0);

        let sq = Space::chebyshev(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(sq.distance(&p(&[0.0, 0.0]), &p(&[0.3, 0.5])).unwrap(), 0.5);

        let c = Space::circle();
        let d = c
            .distance(&Point::angle(0.0).unwrap(), &Point::angle(PI).unwrap())
            .unwrap();
        assert!((d - 2.0).abs() < 1e-15);
    }

    #[test]
    fn distance_dimension_mismatch() {
        let sq = Space::euclidean(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            sq.distance(&p(&[0.0]), &p(&[0.0, 1.0])),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn membership() {
        let punctured = Space::interval(-1.0, 1.0)
            .unwrap()
            .with_exclusion(Exclusion::point(vec![0.0]))
            .unwrap();
        assert!(!punctured.in_domain(&p(&[0.0])));
        assert!(punctured.in_domain(&p(&[1e-300])));
        let full = Space::interval(-1.0, 1.0).unwrap();
        assert!(full.in_domain(&p(&[0.5])));
        let sq = Space::euclidean(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(!sq.in_domain(&p(&[2.0, 0.0])));
    }

    #[test]
    fn box_validation() {
        assert!(Space::euclidean(vec![], vec![]).is_err());
        assert!(Space::euclidean(vec![1.0], vec![1.0]).is_err());
        assert!(Space::interval(0.0, 1.0)
            .unwrap()
            .with_exclusion(Exclusion::point(vec![1.0]))
            .is_err());
        assert!(Space::interval(0.0, 1.0)
            .unwrap()
            .with_exclusion(Exclusion::ball(vec![0.5], 0.6))
            .is_err());
    }

    #[test]
    fn space_json_roundtrip() {
        let s = Space::interval(-1.0, 1.0)
            .unwrap()
            .with_exclusion(Exclusion::point(vec![0.0]))
            .unwrap();
        let js = serde_json::to_string(&s).unwrap();
        let back: Space = serde_json::from_str(&js).unwrap();
        assert_eq!(s, back);
        let bad = r#"{"kind":"euclidean","lower":[1],"upper":[0]}"#;
        assert!(serde_json::from_str::<Space>(bad).is_err());
        let c: Space = serde_json::from_str(r#"{"kind":"circle"}"#).unwrap();
        assert_eq!(c, Space::Circle);
    }

    #[test]
    fn grid_net_examples() {
        let unit = Arc::new(Space::interval(0.0, 1.0).unwrap());
        let net = grid_net(&unit, 0.5).unwrap();
        let pts: Vec<f64> = net.points().map(|q| q[0]).collect();
        assert_eq!(pts, vec![0.0, 0.5, 1.0]);

        let circle = Arc::new(Space::circle());
        let net = grid_net(&circle, 2.0).unwrap();
        assert!(net.len() <= 4);
        for k in 0..100 {
            let q = [TAU * k as f64 / 100.0];
            let m = net.points().map(|x| circle.dist(x, &q)).fold(f64::MAX, f64::min);
            assert!(m <= 2.0);
        }

        assert!(matches!(grid_net(&unit, 0.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn grid_net_square_lattice() {
        let sq = Arc::new(Space::euclidean(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap());
        let net = grid_net(&sq, 0.05).unwrap();
        assert_eq!(net.len(), 441);
        // exhaustive coverage of a finer lattice
        for i in 0..=200 {
            for j in 0..=200 {
                let q = [i as f64 / 200.0, j as f64 / 200.0];
                let m = net.points().map(|x| sq.dist(x, &q)).fold(f64::MAX, f64::min);
                assert!(m <= 0.05);
            }
        }
    }

    #[test]
    fn grid_net_with_excluded_ball() {
        let s = Arc::new(
            Space::euclidean(vec![0.0, 0.0], vec![1.0, 1.0])
                .unwrap()
                .with_exclusion(Exclusion::ball(vec![0.5, 0.5], 0.2))
                .unwrap(),
        );
        let net = grid_net(&s, 0.1).unwrap();
        assert!(net.points().all(|q| s.contains(q)));
        for i in 0..=100 {
            for j in 0..=100 {
                let q = [i as f64 / 100.0, j as f64 / 100.0];
                if !s.contains(&q) {
                    continue;
                }
                let m = net.points().map(|x| s.dist(x, &q)).fold(f64::MAX, f64::min);
                assert!(m <= 0.1, "{q:?} uncovered: {m}");
            }
        }
    }

    #[test]
    fn snapping_around_excluded_point() {
        let s = Space::interval(-1.0, 1.0)
            .unwrap()
            .with_exclusion(Exclusion::point(vec![0.0]))
            .unwrap();
        let mut out = Vec::new();
        s.snap_into(&[0.01], 0.1, &mut out).unwrap();
        assert_eq!(out, vec![0.1]);
        out.clear();
        s.snap_into(&[-0.01], 0.1, &mut out).unwrap();
        assert_eq!(out, vec![-0.1]);
    }

    #[test]
    fn angles_normalize() {
        assert_eq!(normalize_angle(-0.0), 0.0);
        assert!(normalize_angle(-1e-18) < TAU);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-15);
    }
}
