//! Nearest-neighbour index over the points of a [`CompactSet`].
//!
//! Queries return the exact minimum of [`Space::dist`] over the indexed
//! points: pruning is conservative and the final comparison always uses the
//! space's own distance function, so results agree bit-for-bit with a
//! brute-force scan.

use crate::hyperspace::CompactSet;
use crate::metric_space::Space;

const LEAF_SIZE: usize = 12;

pub enum NearestIndex<'a> {
    /// One stored coordinate on a box: binary search in the sorted points.
    Line { set: &'a CompactSet },
    Tree { set: &'a CompactSet, tree: KdTree },
}

impl<'a> NearestIndex<'a> {
    pub fn build(set: &'a CompactSet) -> Self {
        match set.space() {
            Space::Circle => NearestIndex::Tree {
                set,
                tree: KdTree::build(set),
            },
            _ if set.width() == 1 => NearestIndex::Line { set },
            _ => NearestIndex::Tree {
                set,
                tree: KdTree::build(set),
            },
        }
    }

    /// `inf_{x ∈ set} d(q, x)`.
    pub fn nearest_distance(&self, q: &[f64]) -> f64 {
        match self {
            NearestIndex::Line { set } => {
                let xs = set.raw();
                let space = set.space();
                // first index with xs[i] >= q
                let i = xs.partition_point(|x| x.total_cmp(&q[0]).is_lt());
                let mut best = f64::INFINITY;
                if i < xs.len() {
                    best = best.min(space.dist(&xs[i..i + 1], q));
                }
                if i > 0 {
                    best = best.min(space.dist(&xs[i - 1..i], q));
                }
                best
            }
            NearestIndex::Tree { set, tree } => tree.nearest(set, q),
        }
    }
}

enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Static kd-tree over index coordinates: the stored coordinates on a box,
/// `(cos θ, sin θ)` on the circle. Axis gaps in index coordinates are lower
/// bounds for every supported metric.
pub struct KdTree {
    dim: usize,
    ids: Vec<usize>,
    nodes: Vec<Node>,
}

fn index_coords(space: &Space, p: &[f64], out: &mut Vec<f64>) {
    match space {
        Space::Circle => {
            out.push(p[0].cos());
            out.push(p[0].sin());
        }
        _ => out.extend_from_slice(p),
    }
}

impl KdTree {
    pub fn build(set: &CompactSet) -> Self {
        let space = set.space();
        let mut coords = Vec::new();
        for p in set.points() {
            index_coords(space, p, &mut coords);
        }
        let dim = coords.len() / set.len();
        let mut ids: Vec<usize> = (0..set.len()).collect();
        let mut nodes = Vec::new();
        build_node(&coords, dim, &mut ids, 0, &mut nodes);
        KdTree {
            dim,
            ids,
            nodes,
        }
    }

    fn nearest(&self, set: &CompactSet, q: &[f64]) -> f64 {
        let mut qi = Vec::with_capacity(self.dim);
        index_coords(set.space(), q, &mut qi);
        let mut best = f64::INFINITY;
        self.visit(0, set, q, &qi, &mut best);
        best
    }

    fn visit(&self, node: usize, set: &CompactSet, q: &[f64], qi: &[f64], best: &mut f64) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                let space = set.space();
                for &id in &self.ids[start..end] {
                    let d = space.dist(set.point(id), q);
                    if d < *best {
                        *best = d;
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let gap = qi[axis] - value;
                let (near, far) = if gap <= 0.0 { (left, right) } else { (right, left) };
                self.visit(near, set, q, qi, best);
                // generous slack: index coordinates and metric values may
                // disagree in the last few bits
                if gap.abs() * (1.0 - 1e-9) - 1e-12 <= *best {
                    self.visit(far, set, q, qi, best);
                }
            }
        }
    }
}

fn build_node(
    coords: &[f64],
    dim: usize,
    ids: &mut [usize],
    offset: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let me = nodes.len();
    if ids.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: offset,
            end: offset + ids.len(),
        });
        return me;
    }
    let c = |id: usize, axis: usize| coords[id * dim + axis];
    let axis = (0..dim)
        .max_by(|&a, &b| {
            let spread = |ax: usize| {
                let (lo, hi) = ids.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &id| {
                    (lo.min(c(id, ax)), hi.max(c(id, ax)))
                });
                hi - lo
            };
            spread(a).total_cmp(&spread(b))
        })
        .unwrap_or(0);
    let mid = ids.len() / 2;
    ids.select_nth_unstable_by(mid, |&a, &b| c(a, axis).total_cmp(&c(b, axis)));
    let value = c(ids[mid], axis);
    nodes.push(Node::Leaf { start: 0, end: 0 });
    let (lo, hi) = ids.split_at_mut(mid);
    let left = build_node(coords, dim, lo, offset, nodes);
    let right = build_node(coords, dim, hi, offset + mid, nodes);
    nodes[me] = Node::Split {
        axis,
        value,
        left,
        right,
    };
    me
}
