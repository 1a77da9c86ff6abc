//! Finite nets standing in for compact sets, and the Hausdorff metric on
//! them.
//!
//! Two formulations of `d_H` are implemented and cross-checked:
//!
//! - sup-inf: `max(sup_{a∈A} d(a,B), sup_{b∈B} d(b,A))`, as a plain double
//!   loop ([`hausdorff`]) and through a nearest-neighbour index
//!   ([`hausdorff_indexed`]); the two agree bit-for-bit.
//! - dilation: `inf{r > 0 : A ⊂ O_r(B) and B ⊂ O_r(A)}` with the open
//!   dilation `O_r`, located by bisection ([`hausdorff_bisection`]).

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rayon::prelude::*;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;
use serde_json::Value;

use crate::error::{invalid, Error, Result};
use crate::index::NearestIndex;
use crate::metric_space::{lex_cmp, Point, Space};

/// A nonempty finite point set, sorted lexicographically and free of
/// duplicates. `resolution` is the lattice size the set was snapped to, or
/// `0.0` for an exact finite set.
#[derive(Debug, Clone)]
pub struct CompactSet {
    space: Arc<Space>,
    resolution: f64,
    width: usize,
    coords: Vec<f64>,
}

impl PartialEq for CompactSet {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.coords == other.coords
    }
}

pub(crate) fn same_space(a: &Arc<Space>, b: &Arc<Space>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

fn check_same_space(a: &CompactSet, b: &CompactSet) -> Result<()> {
    if same_space(&a.space, &b.space) {
        Ok(())
    } else {
        invalid("sets live in different spaces")
    }
}

impl CompactSet {
    pub fn new(space: Arc<Space>, resolution: f64, points: Vec<Point>) -> Result<Self> {
        let w = space.coord_len();
        let mut coords = Vec::with_capacity(points.len() * w);
        for p in points {
            if p.coords().len() != w {
                return invalid("point has the wrong number of coordinates");
            }
            coords.extend(p.into_coords());
        }
        CompactSet::from_coords(space, resolution, coords)
    }

    pub fn singleton(space: Arc<Space>, p: Point) -> Result<Self> {
        CompactSet::new(space, 0.0, vec![p])
    }

    /// Builds a set from flat coordinates (`coord_len` values per point):
    /// validates membership, sorts and removes exact duplicates.
    pub fn from_coords(space: Arc<Space>, resolution: f64, mut coords: Vec<f64>) -> Result<Self> {
        if !(resolution >= 0.0) || !resolution.is_finite() {
            return invalid("resolution must be finite and nonnegative");
        }
        let w = space.coord_len();
        if coords.is_empty() {
            return invalid("a compact set must be nonempty");
        }
        if coords.len() % w != 0 {
            return invalid("coordinate count is not a multiple of the point width");
        }
        for c in coords.iter_mut() {
            *c += 0.0;
        }
        if let Some(bad) = coords.chunks_exact(w).find(|p| !space.contains(p)) {
            return invalid(format!("point {bad:?} is outside the domain"));
        }
        let coords = canonicalize(coords, w);
        Ok(CompactSet {
            space,
            resolution,
            width: w,
            coords,
        })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.width
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.width..(i + 1) * self.width]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.width)
    }

    pub fn to_points(&self) -> Vec<Point> {
        self.points()
            .map(|p| Point::new(p.to_vec()).expect("stored points are finite"))
            .collect()
    }

    /// Flat coordinate storage, in canonical order.
    pub fn raw(&self) -> &[f64] {
        &self.coords
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        let n = self.len();
        let (mut lo, mut hi) = (0, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match lex_cmp(self.point(mid), p) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn is_subset_of(&self, other: &CompactSet) -> bool {
        same_space(&self.space, &other.space) && self.points().all(|p| other.contains(p))
    }

    pub fn union(&self, other: &CompactSet) -> Result<CompactSet> {
        check_same_space(self, other)?;
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Ok(CompactSet {
            space: Arc::clone(&self.space),
            resolution: self.resolution.max(other.resolution),
            width: self.width,
            coords: canonicalize(coords, self.width),
        })
    }

    pub(crate) fn with_resolution(mut self, h: f64) -> Self {
        self.resolution = h;
        self
    }

    /// Stable hash of the point list (bit patterns in canonical order).
    pub fn content_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.coords.len().hash(&mut h);
        for c in &self.coords {
            c.to_bits().hash(&mut h);
        }
        h.finish()
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, p) in self.points().enumerate() {
            for q in self.points().skip(i + 1) {
                best = best.max(self.space.dist(p, q));
            }
        }
        best
    }

    /// One point per line, comma separated coordinates, no header.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.coords.len() * 12);
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(space: Arc<Space>, resolution: f64, text: &str) -> Result<Self> {
        let mut coords = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            for field in line.split(',') {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Parse(format!("line {}: bad number {field:?}", lineno + 1))
                })?;
                coords.push(v);
            }
        }
        CompactSet::from_coords(space, resolution, coords)
    }

    /// A JSON array of points, each an array of coordinates.
    pub fn to_json_value(&self) -> Value {
        Value::Array(
            self.points()
                .map(|p| Value::Array(p.iter().map(|&c| Value::from(c)).collect()))
                .collect(),
        )
    }

    pub fn from_json_value(space: Arc<Space>, resolution: f64, v: &Value) -> Result<Self> {
        let pts: Vec<Vec<f64>> = serde_json::from_value(v.clone())?;
        CompactSet::from_coords(space, resolution, pts.into_iter().flatten().collect())
    }
}

impl Serialize for CompactSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.len()))?;
        for p in self.points() {
            seq.serialize_element(p)?;
        }
        seq.end()
    }
}

fn canonicalize(coords: Vec<f64>, w: usize) -> Vec<f64> {
    if w == 1 {
        let mut v = coords;
        v.sort_unstable_by(|a, b| a.total_cmp(b));
        v.dedup();
        return v;
    }
    let n = coords.len() / w;
    let mut order: Vec<usize> = (0..n).collect();
    let pt = |i: usize| &coords[i * w..(i + 1) * w];
    order.sort_unstable_by(|&a, &b| lex_cmp(pt(a), pt(b)));
    order.dedup_by(|a, b| pt(*a) == pt(*b));
    let mut out = Vec::with_capacity(order.len() * w);
    for i in order {
        out.extend_from_slice(pt(i));
    }
    out
}

/// `sup_{a∈from} inf_{b∈to} d(a, b)` by exhaustive double loop.
pub fn directed_hausdorff(from: &CompactSet, to: &CompactSet) -> Result<f64> {
    check_same_space(from, to)?;
    let space = from.space();
    Ok((0..from.len())
        .into_par_iter()
        .map(|i| {
            let a = from.point(i);
            let mut m = f64::INFINITY;
            for b in to.points() {
                let d = space.dist(a, b);
                if d < m {
                    m = d;
                }
            }
            m
        })
        .reduce(|| 0.0, f64::max))
}

/// Hausdorff distance, sup-inf form, brute force.
pub fn hausdorff(a: &CompactSet, b: &CompactSet) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

/// Directed distance through a nearest-neighbour index on `to`.
pub fn directed_hausdorff_indexed(from: &CompactSet, to: &CompactSet) -> Result<f64> {
    check_same_space(from, to)?;
    let index = NearestIndex::build(to);
    Ok(directed_with(&index, from))
}

fn directed_with(index: &NearestIndex<'_>, from: &CompactSet) -> f64 {
    (0..from.len())
        .into_par_iter()
        .map(|i| index.nearest_distance(from.point(i)))
        .reduce(|| 0.0, f64::max)
}

/// Hausdorff distance using spatial indexes; identical to [`hausdorff`].
pub fn hausdorff_indexed(a: &CompactSet, b: &CompactSet) -> Result<f64> {
    check_same_space(a, b)?;
    if a == b {
        return Ok(0.0);
    }
    let ia = NearestIndex::build(a);
    let ib = NearestIndex::build(b);
    Ok(directed_with(&ib, a).max(directed_with(&ia, b)))
}

/// `B ⊂ O_r(A)`: every point of `b` lies at distance `< r` from `a`.
pub fn dilation_covers(a: &CompactSet, b: &CompactSet, r: f64) -> Result<bool> {
    if !(r > 0.0) {
        return invalid("dilation radius must be positive");
    }
    check_same_space(a, b)?;
    let index = NearestIndex::build(a);
    Ok(b.points().all(|p| index.nearest_distance(p) < r))
}

/// Hausdorff distance as `inf{r > 0 : A ⊂ O_r(B), B ⊂ O_r(A)}`, located by
/// bisection to within `tol`.
pub fn hausdorff_bisection(a: &CompactSet, b: &CompactSet, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return invalid("bisection tolerance must be positive");
    }
    check_same_space(a, b)?;
    let ia = NearestIndex::build(a);
    let ib = NearestIndex::build(b);
    let within = |r: f64| {
        b.points().all(|p| ia.nearest_distance(p) < r)
            && a.points().all(|p| ib.nearest_distance(p) < r)
    };
    let (mut lo, mut hi) = (0.0, a.space().diameter_bound().max(tol));
    while !within(hi) {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if within(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Rounds every point to the lattice of cell size `h` and deduplicates.
/// Points whose lattice cell leaves the domain are clamped to the box, and
/// moved to the nearest in-domain lattice point when they land in an
/// excluded region.
pub fn snap_to_grid(a: &CompactSet, h: f64) -> Result<CompactSet> {
    if !(h > 0.0) || !h.is_finite() {
        return invalid("snap resolution must be positive and finite");
    }
    let mut coords = Vec::with_capacity(a.coords.len());
    for p in a.points() {
        a.space.snap_into(p, h, &mut coords)?;
    }
    Ok(CompactSet {
        space: Arc::clone(&a.space),
        resolution: h,
        width: a.width,
        coords: canonicalize(coords, a.width),
    })
}

/// Snaps raw coordinates (already in the domain) into a set, or keeps them
/// exact when `h == 0`.
pub(crate) fn collect_snapped(space: &Arc<Space>, raw: Vec<f64>, h: f64) -> Result<CompactSet> {
    let w = space.coord_len();
    if h == 0.0 {
        return CompactSet::from_coords(Arc::clone(space), 0.0, raw);
    }
    let mut coords = Vec::with_capacity(raw.len());
    for p in raw.chunks_exact(w) {
        space.snap_into(p, h, &mut coords)?;
    }
    if coords.is_empty() {
        return invalid("operator produced an empty set");
    }
    Ok(CompactSet {
        space: Arc::clone(space),
        resolution: h,
        width: w,
        coords: canonicalize(coords, w),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_space::grid_net;

    fn line() -> Arc<Space> {
        Arc::new(Space::interval(0.0, 1.0).unwrap())
    }

    fn set(space: &Arc<Space>, xs: &[f64]) -> CompactSet {
        CompactSet::from_coords(Arc::clone(space), 0.0, xs.to_vec()).unwrap()
    }

    #[test]
    fn canonical_order_and_dedupe() {
        let s = set(&line(), &[0.5, 0.1, 0.5, 0.0, -0.0]);
        assert_eq!(s.raw(), &[0.0, 0.1, 0.5]);
        assert!(CompactSet::from_coords(line(), 0.0, vec![]).is_err());
        assert!(CompactSet::from_coords(line(), 0.0, vec![1.5]).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        let l = line();
        let a = set(&l, &[0.0, 1.0]);
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff(&set(&l, &[0.0]), &set(&l, &[1.0])).unwrap(), 1.0);
        assert_eq!(hausdorff(&a, &set(&l, &[0.0])).unwrap(), 1.0);
        assert_eq!(directed_hausdorff(&set(&l, &[0.0]), &a).unwrap(), 0.0);
    }

    #[test]
    fn space_mismatch_is_rejected() {
        let a = set(&line(), &[0.0]);
        let other = Arc::new(Space::interval(0.0, 2.0).unwrap());
        let b = set(&other, &[0.0]);
        assert!(matches!(hausdorff(&a, &b), Err(Error::InvalidArgument(_))));
        assert!(hausdorff_indexed(&a, &b).is_err());
    }

    #[test]
    fn dilation_boundary_is_strict() {
        let l = line();
        let a = set(&l, &[0.0]);
        let b = set(&l, &[0.5]);
        assert!(dilation_covers(&a, &b, 0.6).unwrap());
        assert!(!dilation_covers(&a, &b, 0.5).unwrap());
        assert!(dilation_covers(&a, &b, 0.0).is_err());
    }

    #[test]
    fn dilation_on_nested_nets() {
        let l = line();
        let big = grid_net(&l, 0.01).unwrap();
        let sub = Arc::new(Space::interval(0.25, 0.75).unwrap());
        let small_pts: Vec<f64> = grid_net(&sub, 0.01).unwrap().raw().to_vec();
        let small = set(&l, &small_pts);
        assert!(dilation_covers(&big, &small, 0.26).unwrap());
        assert!(dilation_covers(&small, &big, 0.26).unwrap());
        assert!(!dilation_covers(&small, &big, 0.25).unwrap());
    }

    #[test]
    fn bisection_examples() {
        let l = line();
        let a = set(&l, &[0.0]);
        let b = set(&l, &[1.0]);
        let d = hausdorff_bisection(&a, &b, 1e-9).unwrap();
        assert!((d - 1.0).abs() <= 1e-9);
        assert!(hausdorff_bisection(&a, &a, 1e-9).unwrap() <= 1e-9);
        assert!(hausdorff_bisection(&a, &a, 0.0).is_err());
    }

    #[test]
    fn snap_examples() {
        let l = line();
        let s = snap_to_grid(&set(&l, &[0.26, 0.74]), 0.5).unwrap();
        assert_eq!(s.raw(), &[0.5]);
        let aligned = grid_net(&l, 0.25).unwrap();
        assert_eq!(snap_to_grid(&aligned, 0.25).unwrap(), aligned);
        assert!(snap_to_grid(&aligned, -1.0).is_err());
    }

    #[test]
    fn snap_clamps_to_box() {
        let l = Arc::new(Space::interval(0.0, 0.96).unwrap());
        let s = snap_to_grid(&set(&l, &[0.96]), 0.1).unwrap();
        assert_eq!(s.raw(), &[0.96]);
        let s = snap_to_grid(&set(&l, &[0.94]), 0.1).unwrap();
        assert_eq!(s.raw(), &[0.9]);
    }

    #[test]
    fn circle_snapping_wraps() {
        let c = Arc::new(Space::circle());
        let s = CompactSet::from_coords(Arc::clone(&c), 0.0, vec![std::f64::consts::TAU - 1e-6])
            .unwrap();
        assert_eq!(snap_to_grid(&s, 0.01).unwrap().raw(), &[0.0]);
    }

    #[test]
    fn csv_and_json_roundtrip() {
        let sq = Arc::new(Space::euclidean(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap());
        let s = CompactSet::from_coords(
            Arc::clone(&sq),
            0.0,
            vec![0.1, 0.2, 1.0 / 3.0, 0.7, 0.9999999999999999, 0.0],
        )
        .unwrap();
        let csv = s.to_csv();
        assert_eq!(CompactSet::from_csv(Arc::clone(&sq), 0.0, &csv).unwrap(), s);
        let js = serde_json::to_string(&s.to_json_value()).unwrap();
        let v: Value = serde_json::from_str(&js).unwrap();
        assert_eq!(CompactSet::from_json_value(sq, 0.0, &v).unwrap(), s);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let err = CompactSet::from_csv(line(), 0.0, "0.1\nzz\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }
}
