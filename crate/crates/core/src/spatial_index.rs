//! Exact fixed-radius neighbour queries over planar points with a ball tree.
//!
//! Nodes are stored in a flat arena. Each node covers a contiguous span of a
//! permutation of the point indices; leaves partition that permutation.
//! Construction splits at the median along the axis of greatest spread, so
//! the tree is balanced and depends only on the input order.

use crate::error::{Error, Result};
use crate::geometry::Vec2;

pub const DEFAULT_LEAF_CAPACITY: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub center: Vec2,
    pub radius: f64,
    /// Span into [`RadiusIndex::order`].
    pub start: usize,
    pub end: usize,
    pub children: Option<(usize, usize)>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Debug, Clone)]
pub struct RadiusIndex {
    points: Vec<Vec2>,
    order: Vec<usize>,
    nodes: Vec<Node>,
    leaf_capacity: usize,
}

impl RadiusIndex {
    pub fn build(points: Vec<Vec2>, leaf_capacity: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("cannot index an empty point set"));
        }
        if leaf_capacity == 0 {
            return Err(Error::invalid("leaf capacity must be >= 1"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("cannot index non-finite points"));
        }
        let mut index = RadiusIndex {
            order: (0..points.len()).collect(),
            points,
            nodes: Vec::new(),
            leaf_capacity,
        };
        index.build_node(0, index.points.len());
        Ok(index)
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let span = &self.order[start..end];
        let n = span.len() as f64;
        let mut sum = Vec2::ZERO;
        let (mut lo, mut hi) = (
            Vec2::new(f64::INFINITY, f64::INFINITY),
            Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for &i in span {
            let p = self.points[i];
            sum += p;
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let center = sum / n;
        let radius = span
            .iter()
            .map(|&i| self.points[i].distance_squared(center))
            .fold(0.0, f64::max)
            .sqrt();

        let id = self.nodes.len();
        self.nodes.push(Node {
            center,
            radius,
            start,
            end,
            children: None,
        });
        if end - start <= self.leaf_capacity {
            return id;
        }

        let split_x = hi.x - lo.x >= hi.y - lo.y;
        let points = &self.points;
        let key = |i: &usize| if split_x { points[*i].x } else { points[*i].y };
        let mid = (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid, |a, b| key(a).total_cmp(&key(b)).then(a.cmp(b)));
        let left = self.build_node(start, start + mid);
        let right = self.build_node(start + mid, end);
        self.nodes[id].children = Some((left, right));
        id
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Point indices in leaf order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of levels, counting the root as one.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id].children {
                None => 1,
                Some((l, r)) => 1 + walk(nodes, l).max(walk(nodes, r)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Calls `visit` with every index `i` such that `‖points[i] − center‖ ≤ r`.
    /// Visit order is leaf order, not index order.
    pub fn for_each_in_radius(&self, center: Vec2, r: f64, mut visit: impl FnMut(usize)) -> Result<()> {
        if !(r > 0.0) {
            return Err(Error::invalid(format!("query radius must be > 0, got {r}")));
        }
        let r2 = r * r;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            let dc = node.center.distance(center);
            let reach = r + node.radius;
            if dc > reach + 1e-12 * (dc + reach) {
                continue;
            }
            match node.children {
                Some((l, rr)) => {
                    stack.push(rr);
                    stack.push(l);
                }
                None => {
                    for &i in &self.order[node.start..node.end] {
                        if self.points[i].distance_squared(center) <= r2 {
                            visit(i);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Sorted indices of all points within `r` of `center`, boundary included.
    pub fn query_radius(&self, center: Vec2, r: f64) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        self.for_each_in_radius(center, r, |i| out.push(i))?;
        out.sort_unstable();
        Ok(out)
    }
}
