//! Incremental k-d tree over joint configurations of one agent set.
//!
//! Every tree node keeps the bounding box of its subtree, so radius queries
//! can skip subtrees that lie entirely outside the ball and take subtrees
//! that lie entirely inside it without testing individual points.

use super::NodeId;

#[derive(Debug, Clone)]
struct KdNode {
    id: NodeId,
    axis: usize,
    left: Option<usize>,
    right: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    nodes: Vec<KdNode>,
    points: Vec<f64>,
    bbox: Vec<f64>,
}

impl KdTree {
    pub fn new(dim: usize) -> Self {
        KdTree {
            dim,
            nodes: Vec::new(),
            points: Vec::new(),
            bbox: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    fn bbox_mut(&mut self, k: usize) -> &mut [f64] {
        let d = self.dim;
        &mut self.bbox[2 * d * k..2 * d * (k + 1)]
    }

    pub fn insert(&mut self, id: NodeId, p: &[f64]) {
        assert_eq!(p.len(), self.dim);
        let k = self.nodes.len();
        self.points.extend_from_slice(p);
        self.bbox.extend_from_slice(p);
        self.bbox.extend_from_slice(p);
        if k == 0 {
            self.nodes.push(KdNode {
                id,
                axis: 0,
                left: None,
                right: None,
            });
            return;
        }
        let mut cur = 0;
        loop {
            let d = self.dim;
            {
                let b = self.bbox_mut(cur);
                for i in 0..d {
                    b[i] = b[i].min(p[i]);
                    b[d + i] = b[d + i].max(p[i]);
                }
            }
            let axis = self.nodes[cur].axis;
            let go_left = p[axis] < self.point(cur)[axis];
            let next = if go_left {
                self.nodes[cur].left
            } else {
                self.nodes[cur].right
            };
            match next {
                Some(n) => cur = n,
                None => {
                    if go_left {
                        self.nodes[cur].left = Some(k);
                    } else {
                        self.nodes[cur].right = Some(k);
                    }
                    self.nodes.push(KdNode {
                        id,
                        axis: (axis + 1) % d,
                        left: None,
                        right: None,
                    });
                    return;
                }
            }
        }
    }

    /// Ids of all points within Euclidean distance `radius` of `q` (unordered).
    pub fn within(&self, q: &[f64], radius: f64, out: &mut Vec<NodeId>) {
        if self.nodes.is_empty() {
            return;
        }
        let r2 = radius * radius;
        let d = self.dim;
        let mut stack = vec![0usize];
        while let Some(k) = stack.pop() {
            let b = &self.bbox[2 * d * k..2 * d * (k + 1)];
            let (mut near2, mut far2) = (0.0, 0.0);
            for i in 0..d {
                let (lo, hi) = (b[i], b[d + i]);
                let below = (lo - q[i]).max(0.0);
                let above = (q[i] - hi).max(0.0);
                let gap = below.max(above);
                near2 += gap * gap;
                let spread = (q[i] - lo).abs().max((hi - q[i]).abs());
                far2 += spread * spread;
            }
            if near2 > r2 {
                continue;
            }
            if far2 <= r2 {
                self.collect(k, out);
                continue;
            }
            let p = self.point(k);
            let dist2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            if dist2 <= r2 {
                out.push(self.nodes[k].id);
            }
            stack.extend(self.nodes[k].left);
            stack.extend(self.nodes[k].right);
        }
    }

    fn collect(&self, k: usize, out: &mut Vec<NodeId>) {
        let mut stack = vec![k];
        while let Some(k) = stack.pop() {
            out.push(self.nodes[k].id);
            stack.extend(self.nodes[k].left);
            stack.extend(self.nodes[k].right);
        }
    }
}
