use std::cmp::Ordering;

use super::squared_distance;
use crate::error::{Error, Result};
use crate::tactile::Cloud;

/// Result of a nearest-neighbor query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

/// Exact nearest-neighbor search over a fixed point set.
///
/// Implementations must return the point minimizing squared Euclidean
/// distance as computed by [`squared_distance`], with ties going to the
/// lowest point index.
pub trait NearestSearch {
    fn dim(&self) -> usize;
    fn len(&self) -> usize;
    fn point(&self, index: usize) -> &[f64];
    /// `(index, squared distance)` of the nearest point.
    fn nearest_sq(&self, query: &[f64]) -> (usize, f64);

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Node {
    point: u32,
    axis: u8,
    left: u32,
    right: u32,
}

/// Balanced k-d tree. The split axis cycles through the coordinates by
/// depth; each node holds the lower median of its range.
#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    coords: Vec<f64>,
    nodes: Vec<Node>,
    root: u32,
}

impl KdTree {
    pub fn build(cloud: &Cloud) -> Self {
        let dim = cloud.dim();
        let coords = cloud.coords().to_vec();
        let mut order: Vec<u32> = (0..cloud.len() as u32).collect();
        let mut nodes = Vec::with_capacity(cloud.len());
        let root = build_range(&coords, dim, &mut order, 0, &mut nodes);
        Self {
            dim,
            coords,
            nodes,
            root,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: u32) -> usize {
            if id == NONE {
                0
            } else {
                let n = nodes[id as usize];
                1 + walk(nodes, n.left).max(walk(nodes, n.right))
            }
        }
        walk(&self.nodes, self.root)
    }

    pub fn nearest(&self, query: &[f64]) -> Result<Neighbor> {
        if query.len() != self.dim {
            return Err(Error::invalid(format!(
                "query has {} components, tree is {}-D",
                query.len(),
                self.dim
            )));
        }
        let (index, d2) = self.nearest_sq(query);
        Ok(Neighbor {
            index,
            distance: d2.sqrt(),
        })
    }

    fn search(&self, id: u32, query: &[f64], best: &mut (usize, f64)) {
        if id == NONE {
            return;
        }
        let node = self.nodes[id as usize];
        let idx = node.point as usize;
        let d2 = squared_distance(query, self.point(idx));
        if d2 < best.1 || (d2 == best.1 && idx < best.0) {
            *best = (idx, d2);
        }
        let axis = node.axis as usize;
        let diff = query[axis] - self.coords[idx * self.dim + axis];
        let (near, far) = if diff < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        self.search(near, query, best);
        // Points across the plane are at least |diff| away; equality may still tie.
        if diff * diff <= best.1 {
            self.search(far, query, best);
        }
    }
}

fn build_range(coords: &[f64], dim: usize, order: &mut [u32], depth: usize, nodes: &mut Vec<Node>) -> u32 {
    if order.is_empty() {
        return NONE;
    }
    let axis = depth % dim;
    let key = |i: &u32| coords[*i as usize * dim + axis];
    let mid = (order.len() - 1) / 2;
    order.select_nth_unstable_by(mid, |a, b| match key(a).total_cmp(&key(b)) {
        Ordering::Equal => a.cmp(b),
        o => o,
    });
    let id = nodes.len() as u32;
    nodes.push(Node {
        point: order[mid],
        axis: axis as u8,
        left: NONE,
        right: NONE,
    });
    let (lo, rest) = order.split_at_mut(mid);
    let hi = &mut rest[1..];
    let left = build_range(coords, dim, lo, depth + 1, nodes);
    let right = build_range(coords, dim, hi, depth + 1, nodes);
    nodes[id as usize].left = left;
    nodes[id as usize].right = right;
    id
}

impl NearestSearch for KdTree {
    fn dim(&self) -> usize {
        self.dim
    }

    fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    fn point(&self, index: usize) -> &[f64] {
        &self.coords[index * self.dim..(index + 1) * self.dim]
    }

    fn nearest_sq(&self, query: &[f64]) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(self.root, query, &mut best);
        best
    }
}
