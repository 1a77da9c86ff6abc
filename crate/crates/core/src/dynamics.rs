//! Multivalued maps, the Hutchinson operator they induce on compact sets, and
//! orbits of hyperspace operators.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::hyperspace::{collect_snapped, hausdorff_indexed, same_space, CompactSet};
use crate::metric_space::{normalize_angle, Point, Space};

/// A user-supplied single-valued map, e.g. a leaf map built by a scenario.
#[derive(Clone)]
pub struct LeafMap {
    pub name: String,
    pub lipschitz: Option<f64>,
    f: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl LeafMap {
    pub fn new(
        name: impl Into<String>,
        lipschitz: Option<f64>,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        LeafMap {
            name: name.into(),
            lipschitz,
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for LeafMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LeafMap").field("name", &self.name).finish()
    }
}

/// One continuous self-map of an iterated function system.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Branch {
    /// `x ↦ Mx + b`, matrix given row by row.
    Affine {
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
    /// Coordinatewise `x ↦ sign(x)·|x|^p`, with `0 ↦ 0`.
    Power { exponent: f64 },
    /// Rotation of the circle by `angle` radians.
    Rotation { angle: f64 },
    Identity,
    #[serde(skip)]
    Custom(LeafMap),
}

impl Branch {
    pub fn scale(factor: f64, offset: f64) -> Branch {
        Branch::Affine {
            matrix: vec![vec![factor]],
            offset: vec![offset],
        }
    }

    fn check_compatible(&self, space: &Space) -> Result<()> {
        let d = space.coord_len();
        match (self, space) {
            (Branch::Rotation { .. }, Space::Circle) => Ok(()),
            (Branch::Rotation { .. }, _) => invalid("rotation branches need the circle"),
            (Branch::Affine { .. } | Branch::Power { .. }, Space::Circle) => {
                invalid("affine and power branches need a box space")
            }
            (Branch::Affine { matrix, offset }, _) => {
                if matrix.len() != d || matrix.iter().any(|r| r.len() != d) || offset.len() != d {
                    return invalid(format!("affine branch must be {d}x{d} with a length-{d} offset"));
                }
                if matrix.iter().flatten().chain(offset).any(|v| !v.is_finite()) {
                    return invalid("affine coefficients must be finite");
                }
                Ok(())
            }
            (Branch::Power { exponent }, _) => {
                if !(*exponent > 0.0) || !exponent.is_finite() {
                    return invalid("power exponent must be positive");
                }
                Ok(())
            }
            (Branch::Identity | Branch::Custom(_), _) => Ok(()),
        }
    }

    fn apply_raw(&self, x: &[f64], out: &mut Vec<f64>) {
        match self {
            Branch::Affine { matrix, offset } => {
                for (row, b) in matrix.iter().zip(offset) {
                    out.push(row.iter().zip(x).map(|(m, v)| m * v).sum::<f64>() + b);
                }
            }
            Branch::Power { exponent } => {
                out.extend(x.iter().map(|&v| {
                    if v == 0.0 {
                        0.0
                    } else {
                        v.signum() * v.abs().powf(*exponent)
                    }
                }));
            }
            Branch::Rotation { angle } => out.push(normalize_angle(x[0] + angle)),
            Branch::Identity => out.extend_from_slice(x),
            Branch::Custom(m) => out.extend((m.f)(x)),
        }
    }

    /// A Lipschitz constant for the branch in the given space, when one is
    /// known in closed form.
    pub fn lipschitz_bound(&self, space: &Space) -> Option<f64> {
        match self {
            Branch::Identity | Branch::Rotation { .. } => Some(1.0),
            Branch::Power { exponent } if *exponent == 1.0 => Some(1.0),
            Branch::Power { .. } => None,
            Branch::Custom(m) => m.lipschitz,
            Branch::Affine { matrix, .. } => Some(match space {
                Space::Chebyshev(_) => matrix
                    .iter()
                    .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                    .fold(0.0, f64::max),
                _ => spectral_norm(matrix),
            }),
        }
    }
}

fn spectral_norm(m: &[Vec<f64>]) -> f64 {
    let d = m.len();
    if d == 1 {
        return m[0][0].abs();
    }
    // power iteration on MᵀM
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut lambda = 0.0;
    for _ in 0..200 {
        let mv: Vec<f64> = m.iter().map(|r| r.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        let mut w = vec![0.0; d];
        for (i, row) in m.iter().enumerate() {
            for (j, a) in row.iter().enumerate() {
                w[j] += a * mv[i];
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        v = w.into_iter().map(|x| x / norm).collect();
    }
    lambda.sqrt()
}

/// Where a hyperspace operator comes from. Only operators induced pointwise
/// by a multivalued map, `F(A) = ⋃_{x∈A} F(x)`, are monotone under inclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorOrigin {
    MultivaluedMap,
    SetLevel,
}

/// A continuous self-map of the hyperspace of a space.
pub trait HyperspaceOperator: Send + Sync {
    fn space(&self) -> &Arc<Space>;

    /// One application, with the output snapped to resolution `h` (`h == 0`
    /// keeps the exact image).
    fn apply(&self, set: &CompactSet, h: f64) -> Result<CompactSet>;

    fn origin(&self) -> OperatorOrigin;

    fn name(&self) -> String;
}

/// A multivalued map `x ↦ {f_1(x), …, f_N(x)}` built from finitely many
/// branches.
#[derive(Debug, Clone)]
pub struct MultiMap {
    space: Arc<Space>,
    branches: Vec<Branch>,
}

const INVARIANCE_SAMPLES: usize = 512;

impl MultiMap {
    /// Validates branch shapes and checks, on a fixed sample of domain
    /// points, that every branch keeps the domain invariant.
    pub fn new(space: Arc<Space>, branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return invalid("a multivalued map needs at least one branch");
        }
        for b in &branches {
            b.check_compatible(&space)?;
        }
        let map = MultiMap { space, branches };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut out = Vec::new();
        for x in sample_domain(&map.space, INVARIANCE_SAMPLES, &mut rng) {
            for (i, b) in map.branches.iter().enumerate() {
                out.clear();
                map.apply_branch(b, &x, &mut out).map_err(|_| {
                    crate::Error::InvalidArgument(format!(
                        "branch {i} maps {x:?} outside the domain"
                    ))
                })?;
            }
        }
        Ok(map)
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Largest branch Lipschitz constant, which bounds the Lipschitz constant
    /// of the induced operator in `d_H`.
    pub fn lipschitz_bound(&self) -> Option<f64> {
        self.branches
            .iter()
            .map(|b| b.lipschitz_bound(&self.space))
            .try_fold(0.0f64, |acc, l| l.map(|l| acc.max(l)))
    }

    /// Applies one branch to `x`, absorbing round-off that pushes the image a
    /// hair outside the box.
    fn apply_branch(&self, b: &Branch, x: &[f64], out: &mut Vec<f64>) -> Result<()> {
        let start = out.len();
        b.apply_raw(x, out);
        let img = &mut out[start..];
        if img.len() != self.space.coord_len() {
            return invalid("branch returned a point of the wrong width");
        }
        if let Some(bx) = self.space.box_domain() {
            for (i, v) in img.iter_mut().enumerate() {
                let (lo, hi) = (bx.lower[i], bx.upper[i]);
                let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
                if *v < lo && *v >= lo - slack {
                    *v = lo;
                } else if *v > hi && *v <= hi + slack {
                    *v = hi;
                }
                *v += 0.0;
            }
        }
        if !self.space.contains(img) {
            return invalid(format!("image {img:?} is outside the domain"));
        }
        Ok(())
    }

    pub(crate) fn image_raw(&self, x: &[f64], out: &mut Vec<f64>) -> Result<()> {
        for b in &self.branches {
            self.apply_branch(b, x, out)?;
        }
        Ok(())
    }
}

/// Box corners plus uniform points, for invariance checks.
fn sample_domain<R: Rng>(space: &Space, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    if let Some(b) = space.box_domain() {
        out.push(b.lower.clone());
        out.push(b.upper.clone());
        out.retain(|p| space.contains(p));
    }
    out.extend(random_points(space, n.saturating_sub(out.len()), rng));
    out
}

/// Up to `n` uniform points of the domain (rejection sampling on boxes with
/// exclusions, so a few may be missing).
pub(crate) fn random_points<R: Rng>(space: &Space, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    match space {
        Space::Circle => {
            for _ in 0..n {
                out.push(vec![normalize_angle(rng.gen::<f64>() * std::f64::consts::TAU)]);
            }
        }
        Space::Euclidean(b) | Space::Chebyshev(b) => {
            let mut tries = 0;
            while out.len() < n && tries < 20 * n {
                tries += 1;
                let p: Vec<f64> = b
                    .lower
                    .iter()
                    .zip(&b.upper)
                    .map(|(lo, hi)| rng.gen_range(*lo..=*hi))
                    .collect();
                if space.contains(&p) {
                    out.push(p);
                }
            }
        }
    }
    out
}

impl HyperspaceOperator for MultiMap {
    fn space(&self) -> &Arc<Space> {
        &self.space
    }

    fn apply(&self, set: &CompactSet, h: f64) -> Result<CompactSet> {
        hutchinson_apply(self, set, h)
    }

    fn origin(&self) -> OperatorOrigin {
        OperatorOrigin::MultivaluedMap
    }

    fn name(&self) -> String {
        format!("hutchinson({} branches)", self.branches.len())
    }
}

/// `F(x)` as an exact finite set.
pub fn evaluate(map: &MultiMap, x: &Point) -> Result<CompactSet> {
    if !map.space.in_domain(x) {
        return invalid("evaluation point is outside the domain");
    }
    let mut raw = Vec::with_capacity(map.branches.len() * x.coords().len());
    map.image_raw(x.coords(), &mut raw)?;
    CompactSet::from_coords(Arc::clone(&map.space), 0.0, raw)
}

/// The Hutchinson operator `F(A) = ⋃_{x∈A} F(x)`, snapped to resolution `h`
/// (`h == 0` keeps the exact union).
pub fn hutchinson_apply(map: &MultiMap, a: &CompactSet, h: f64) -> Result<CompactSet> {
    if !same_space(map.space(), a.space_arc()) {
        return invalid("set and map live in different spaces");
    }
    if !(h >= 0.0) || !h.is_finite() {
        return invalid("resolution must be finite and nonnegative");
    }
    let chunks: Vec<Result<Vec<f64>>> = (0..a.len())
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::with_capacity(map.branches.len() * a.width());
            map.image_raw(a.point(i), &mut out)?;
            Ok(out)
        })
        .collect();
    let mut raw = Vec::with_capacity(a.len() * map.branches.len() * a.width());
    for c in chunks {
        raw.extend(c?);
    }
    collect_snapped(&map.space, raw, h)
}

/// A finite orbit `A_0, A_1 = F(A_0), …` with per-step residuals.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub sets: Vec<CompactSet>,
    /// `d_H(A_k, A_{k+1})`.
    pub residuals: Vec<f64>,
    /// `d_H(A_k, reference)` for every set, when a reference was given.
    pub ref_distances: Option<Vec<f64>>,
    pub resolution: f64,
    /// Worst-case `d_H` perturbation added by one snapping step,
    /// `(h/2)·√dimension`.
    pub snap_error_per_step: f64,
}

impl Trajectory {
    pub fn last(&self) -> &CompactSet {
        self.sets.last().expect("trajectories are nonempty")
    }

    /// `step,residual,ref_distance` rows; step `k` pairs the residual
    /// `d_H(A_k, A_{k+1})` with `d_H(A_k, ref)`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,residual,ref_distance\n");
        for k in 0..self.sets.len() {
            let res = self.residuals.get(k).map(|r| r.to_string()).unwrap_or_default();
            let rd = self
                .ref_distances
                .as_ref()
                .map(|v| v[k].to_string())
                .unwrap_or_default();
            s.push_str(&format!("{k},{res},{rd}\n"));
        }
        s
    }
}

pub fn snap_error_bound(space: &Space, h: f64) -> f64 {
    0.5 * h * (space.dimension() as f64).sqrt()
}

/// `n` applications of `op` starting from `b0`.
pub fn iterate(
    op: &dyn HyperspaceOperator,
    b0: &CompactSet,
    n: usize,
    h: f64,
    reference: Option<&CompactSet>,
) -> Result<Trajectory> {
    if n == 0 {
        return invalid("iteration count must be at least 1");
    }
    let mut sets = Vec::with_capacity(n + 1);
    let mut residuals = Vec::with_capacity(n);
    sets.push(b0.clone());
    for _ in 0..n {
        let next = op.apply(sets.last().unwrap(), h)?;
        residuals.push(hausdorff_indexed(sets.last().unwrap(), &next)?);
        sets.push(next);
    }
    let ref_distances = reference
        .map(|r| sets.iter().map(|s| hausdorff_indexed(s, r)).collect::<Result<Vec<_>>>())
        .transpose()?;
    Ok(Trajectory {
        snap_error_per_step: snap_error_bound(b0.space(), h),
        sets,
        residuals,
        ref_distances,
        resolution: h,
    })
}

/// Lazy orbit that does not retain past sets.
pub struct Orbit<'a> {
    op: &'a dyn HyperspaceOperator,
    current: CompactSet,
    h: f64,
}

impl<'a> Orbit<'a> {
    pub fn new(op: &'a dyn HyperspaceOperator, start: CompactSet, h: f64) -> Self {
        Orbit {
            op,
            current: start,
            h,
        }
    }

    pub fn current(&self) -> &CompactSet {
        &self.current
    }

    pub fn step(&mut self) -> Result<&CompactSet> {
        self.current = self.op.apply(&self.current, self.h)?;
        Ok(&self.current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cantor() -> MultiMap {
        let s = Arc::new(Space::interval(0.0, 1.0).unwrap());
        MultiMap::new(s, vec![Branch::scale(1.0 / 3.0, 0.0), Branch::scale(1.0 / 3.0, 2.0 / 3.0)])
            .unwrap()
    }

    fn cube_root() -> MultiMap {
        let s = Arc::new(Space::interval(-1.0, 1.0).unwrap());
        MultiMap::new(s, vec![Branch::Power { exponent: 1.0 / 3.0 }]).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let f = cantor();
        let img = evaluate(&f, &Point::scalar(0.0).unwrap()).unwrap();
        assert_eq!(img.len(), 2);
        assert_eq!(img.point(0), &[0.0]);
        assert!((img.point(1)[0] - 2.0 / 3.0).abs() < 1e-15);

        let rot = MultiMap::new(
            Arc::new(Space::circle()),
            vec![Branch::Identity, Branch::Rotation { angle: 1.0 }],
        )
        .unwrap();
        let img = evaluate(&rot, &Point::angle(6.0).unwrap()).unwrap();
        assert_eq!(img.raw(), &[normalize_angle(7.0), 6.0]);

        let g = cube_root();
        assert_eq!(evaluate(&g, &Point::scalar(1.0).unwrap()).unwrap().raw(), &[1.0]);
        assert!(evaluate(&g, &Point::scalar(2.0).unwrap()).is_err());
    }

    #[test]
    fn power_branch_fixes_zero() {
        let g = cube_root();
        assert_eq!(evaluate(&g, &Point::scalar(0.0).unwrap()).unwrap().raw(), &[0.0]);
        let y = evaluate(&g, &Point::scalar(-0.125).unwrap()).unwrap().raw()[0];
        assert!((y + 0.5).abs() < 1e-15);
    }

    #[test]
    fn construction_checks() {
        let s = Arc::new(Space::interval(0.0, 1.0).unwrap());
        assert!(MultiMap::new(Arc::clone(&s), vec![]).is_err());
        assert!(MultiMap::new(Arc::clone(&s), vec![Branch::scale(2.0, 0.0)]).is_err());
        assert!(MultiMap::new(Arc::clone(&s), vec![Branch::Rotation { angle: 1.0 }]).is_err());
        assert!(MultiMap::new(
            Arc::new(Space::circle()),
            vec![Branch::Power { exponent: 0.5 }]
        )
        .is_err());
    }

    #[test]
    fn hutchinson_examples() {
        let f = cantor();
        let s = Arc::clone(f.space());
        let a = CompactSet::from_coords(Arc::clone(&s), 0.0, vec![0.0, 1.0]).unwrap();
        let img = hutchinson_apply(&f, &a, 0.0).unwrap();
        let want = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        assert_eq!(img.len(), 4);
        for (x, w) in img.raw().iter().zip(want) {
            assert!((x - w).abs() < 1e-15);
        }

        let g = cube_root();
        let a3 = CompactSet::from_coords(Arc::clone(g.space()), 0.0, vec![-1.0, 1.0]).unwrap();
        assert_eq!(hutchinson_apply(&g, &a3, 1e-4).unwrap(), a3);

        let id = MultiMap::new(Arc::clone(&s), vec![Branch::Identity]).unwrap();
        let b = CompactSet::from_coords(s, 0.0, vec![0.1, 0.35]).unwrap();
        assert_eq!(hutchinson_apply(&id, &b, 0.0).unwrap(), b);
    }

    #[test]
    fn rotation_orbit_sizes() {
        let alpha = PI * (5f64.sqrt() - 1.0);
        let rot = MultiMap::new(
            Arc::new(Space::circle()),
            vec![Branch::Identity, Branch::Rotation { angle: alpha }],
        )
        .unwrap();
        let b0 = CompactSet::singleton(Arc::clone(rot.space()), Point::angle(0.3).unwrap()).unwrap();
        let traj = iterate(&rot, &b0, 40, 0.0, None).unwrap();
        for (k, s) in traj.sets.iter().enumerate() {
            assert_eq!(s.len(), k + 1);
        }
    }

    #[test]
    fn cube_root_orbit_matches_direct_iteration() {
        let g = cube_root();
        let b0 = CompactSet::from_coords(Arc::clone(g.space()), 0.0, vec![0.5]).unwrap();
        let traj = iterate(&g, &b0, 5, 0.0, None).unwrap();
        let mut x = 0.5f64;
        for _ in 0..5 {
            x = x.cbrt();
        }
        let got = traj.last().point(0)[0];
        assert!((got - x).abs() < 1e-14);
        assert!((got - 0.997152).abs() < 1e-6);
    }

    #[test]
    fn iterate_rejects_zero_steps() {
        let f = cantor();
        let b0 = CompactSet::from_coords(Arc::clone(f.space()), 0.0, vec![0.5]).unwrap();
        assert!(iterate(&f, &b0, 0, 0.0, None).is_err());
    }

    #[test]
    fn lipschitz_bounds() {
        assert_eq!(cantor().lipschitz_bound(), Some(1.0 / 3.0));
        assert_eq!(cube_root().lipschitz_bound(), None);
        let m = vec![vec![0.0, 0.5], vec![0.5, 0.0]];
        assert!((spectral_norm(&m) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn trajectory_csv_layout() {
        let f = cantor();
        let b0 = CompactSet::from_coords(Arc::clone(f.space()), 0.0, vec![0.0, 1.0]).unwrap();
        let traj = iterate(&f, &b0, 2, 0.0, Some(&b0)).unwrap();
        let csv = traj.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "step,residual,ref_distance");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("2,,"));
    }
}
