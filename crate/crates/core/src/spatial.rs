//! Spatial index over neuron positions and 2-D convex hulls.
//!
//! Queries are exact: k-NN results equal a brute-force scan, with distance
//! ties broken by ascending neuron id so results never depend on build or
//! traversal order. The index is immutable after construction and safe to
//! share across query threads.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{CoreError, Result};
use crate::types::NeuronRecord;

/// Planar point in micrometers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointUm {
    pub x: f64,
    pub y: f64,
}

impl PointUm {
    pub fn new(x: f64, y: f64) -> Self {
        PointUm { x, y }
    }

    pub fn dist(&self, other: &PointUm) -> f64 {
        self.dist2(other).sqrt()
    }

    fn dist2(&self, other: &PointUm) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    fn coord(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.x
        } else {
            self.y
        }
    }
}

/// One neighbor of a query neuron.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub id: u64,
    pub dist_um: f64,
}

/// Result of a k-NN query; `clamped` is set when k exceeded n-1.
#[derive(Clone, Debug)]
pub struct KnnResult {
    pub neighbors: Vec<Neighbor>,
    pub clamped: bool,
}

const LEAF_SIZE: usize = 16;

enum Node {
    Leaf { start: u32, end: u32 },
    Internal { axis: u8, split: f64, left: u32, right: u32 },
}

/// Balanced kd-tree over neuron positions with exact queries.
pub struct SpatialIndex {
    points: Vec<PointUm>,
    ids: Vec<u64>,
    /// (id, slot) sorted by id, for id -> slot lookup.
    by_id: Vec<(u64, u32)>,
    nodes: Vec<Node>,
    /// Permutation of slots; leaves reference contiguous ranges.
    order: Vec<u32>,
    root: u32,
}

impl SpatialIndex {
    /// Build an index over all neuron positions. Errors on empty input.
    pub fn build(neurons: &[NeuronRecord]) -> Result<Self> {
        let pts: Vec<PointUm> = neurons
            .iter()
            .map(|n| PointUm::new(n.x_um, n.y_um))
            .collect();
        let ids: Vec<u64> = neurons.iter().map(|n| n.id).collect();
        Self::from_points(pts, ids)
    }

    /// Build from bare points with associated ids.
    pub fn from_points(points: Vec<PointUm>, ids: Vec<u64>) -> Result<Self> {
        if points.is_empty() {
            return Err(CoreError::EmptyInput("spatial index"));
        }
        debug_assert_eq!(points.len(), ids.len());
        let mut by_id: Vec<(u64, u32)> = ids
            .iter()
            .enumerate()
            .map(|(slot, &id)| (id, slot as u32))
            .collect();
        by_id.sort_unstable();

        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::new();
        let root = build_node(&points, &ids, &mut order, 0, points.len(), &mut nodes);
        Ok(SpatialIndex {
            points,
            ids,
            by_id,
            nodes,
            order,
            root,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Internal slot of a neuron id.
    fn slot_of(&self, id: u64) -> Result<usize> {
        self.by_id
            .binary_search_by_key(&id, |&(id, _)| id)
            .map(|i| self.by_id[i].1 as usize)
            .map_err(|_| CoreError::UnknownId(id))
    }

    pub fn point_of(&self, id: u64) -> Result<PointUm> {
        Ok(self.points[self.slot_of(id)?])
    }

    /// Exact k nearest neighbors of a neuron, excluding the neuron itself.
    ///
    /// Neighbors are sorted by ascending (distance, id); k is clamped to
    /// n-1 and the result flagged when it exceeds that.
    pub fn knn(&self, query_id: u64, k: usize) -> Result<KnnResult> {
        if k == 0 {
            return Err(CoreError::InvalidConfig("k must be >= 1".into()));
        }
        let slot = self.slot_of(query_id)?;
        let max_k = self.len() - 1;
        let k_eff = k.min(max_k);
        let neighbors = self.knn_at(self.points[slot], k_eff, Some(query_id));
        Ok(KnnResult {
            neighbors,
            clamped: k > max_k,
        })
    }

    /// Exact k nearest neighbors of an arbitrary point.
    pub fn knn_at(&self, query: PointUm, k: usize, exclude_id: Option<u64>) -> Vec<Neighbor> {
        if k == 0 {
            return Vec::new();
        }
        let mut heap = BoundedHeap::new(k);
        self.search(self.root, query, exclude_id, &mut heap);
        heap.into_sorted()
    }

    /// Nearest neuron to an arbitrary point (no exclusion).
    pub fn nearest(&self, query: PointUm) -> Neighbor {
        self.knn_at(query, 1, None)[0]
    }

    /// All neighbors within `radius_um` of a neuron, excluding it,
    /// sorted by ascending (distance, id).
    pub fn within_radius(&self, query_id: u64, radius_um: f64) -> Result<Vec<Neighbor>> {
        let slot = self.slot_of(query_id)?;
        let query = self.points[slot];
        let r2 = radius_um * radius_um;
        let mut hits = Vec::new();
        self.collect_within(self.root, query, r2, Some(query_id), &mut hits);
        hits.sort_unstable_by(|a, b| {
            a.dist_um
                .total_cmp(&b.dist_um)
                .then_with(|| a.id.cmp(&b.id))
        });
        Ok(hits)
    }

    fn search(&self, node: u32, query: PointUm, exclude: Option<u64>, heap: &mut BoundedHeap) {
        match self.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for &slot in &self.order[start as usize..end as usize] {
                    let id = self.ids[slot as usize];
                    if exclude == Some(id) {
                        continue;
                    }
                    heap.offer(query.dist2(&self.points[slot as usize]), id);
                }
            }
            Node::Internal {
                axis,
                split,
                left,
                right,
            } => {
                let delta = query.coord(axis as usize) - split;
                let (near, far) = if delta < 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, exclude, heap);
                // A tie at the splitting plane can still hold a lower id,
                // so the far side is pruned only on a strict excess.
                if !heap.is_full() || delta * delta <= heap.worst_d2() {
                    self.search(far, query, exclude, heap);
                }
            }
        }
    }

    fn collect_within(
        &self,
        node: u32,
        query: PointUm,
        r2: f64,
        exclude: Option<u64>,
        out: &mut Vec<Neighbor>,
    ) {
        match self.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for &slot in &self.order[start as usize..end as usize] {
                    let id = self.ids[slot as usize];
                    if exclude == Some(id) {
                        continue;
                    }
                    let d2 = query.dist2(&self.points[slot as usize]);
                    if d2 <= r2 {
                        out.push(Neighbor {
                            id,
                            dist_um: d2.sqrt(),
                        });
                    }
                }
            }
            Node::Internal {
                axis,
                split,
                left,
                right,
            } => {
                let delta = query.coord(axis as usize) - split;
                let (near, far) = if delta < 0.0 { (left, right) } else { (right, left) };
                self.collect_within(near, query, r2, exclude, out);
                if delta * delta <= r2 {
                    self.collect_within(far, query, r2, exclude, out);
                }
            }
        }
    }
}

fn build_node(
    points: &[PointUm],
    ids: &[u64],
    order: &mut [u32],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> u32 {
    let len = end - start;
    if len <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: start as u32,
            end: end as u32,
        });
        return (nodes.len() - 1) as u32;
    }

    // Split on the axis of larger extent; ties favor x.
    let slice = &mut order[start..end];
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for &s in slice.iter() {
        let p = points[s as usize];
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    let axis = if (max_y - min_y) > (max_x - min_x) { 1 } else { 0 };

    let mid = len / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize]
            .coord(axis)
            .total_cmp(&points[b as usize].coord(axis))
            .then_with(|| ids[a as usize].cmp(&ids[b as usize]))
    });
    let split = points[slice[mid] as usize].coord(axis);

    let node_idx = nodes.len() as u32;
    nodes.push(Node::Leaf { start: 0, end: 0 }); // placeholder
    let left = build_node(points, ids, order, start, start + mid, nodes);
    let right = build_node(points, ids, order, start + mid, end, nodes);
    nodes[node_idx as usize] = Node::Internal {
        axis: axis as u8,
        split,
        left,
        right,
    };
    node_idx
}

/// Fixed-capacity worst-first candidate set ordered by (distance, id).
struct BoundedHeap {
    cap: usize,
    items: alloc::collections::BinaryHeap<HeapItem>,
}

#[derive(PartialEq)]
struct HeapItem {
    d2: f64,
    id: u64,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.d2
            .total_cmp(&other.d2)
            .then_with(|| self.id.cmp(&other.id))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl BoundedHeap {
    fn new(cap: usize) -> Self {
        BoundedHeap {
            cap,
            items: alloc::collections::BinaryHeap::with_capacity(cap + 1),
        }
    }

    fn is_full(&self) -> bool {
        self.items.len() >= self.cap
    }

    fn worst_d2(&self) -> f64 {
        self.items.peek().map_or(f64::INFINITY, |w| w.d2)
    }

    fn offer(&mut self, d2: f64, id: u64) {
        let cand = HeapItem { d2, id };
        if self.items.len() < self.cap {
            self.items.push(cand);
        } else if let Some(worst) = self.items.peek() {
            if cand < *worst {
                self.items.push(cand);
                self.items.pop();
            }
        }
    }

    fn into_sorted(self) -> Vec<Neighbor> {
        let mut v: Vec<HeapItem> = self.items.into_vec();
        v.sort_unstable();
        v.into_iter()
            .map(|it| Neighbor {
                id: it.id,
                dist_um: it.d2.sqrt(),
            })
            .collect()
    }
}

/// Convex polygon with counter-clockwise, strictly convex vertices.
#[derive(Clone, Debug)]
pub struct Hull {
    pub vertices: Vec<PointUm>,
    pub area_um2: f64,
    pub perimeter_um: f64,
}

impl Hull {
    /// Point-in-polygon test with a signed-distance tolerance in µm.
    pub fn contains(&self, p: PointUm, tol_um: f64) -> bool {
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let edge_len = a.dist(&b);
            if edge_len == 0.0 {
                continue;
            }
            // Signed distance of p left of edge a->b (positive = inside).
            let cr = cross(a, b, p);
            if cr / edge_len < -tol_um {
                return false;
            }
        }
        true
    }
}

fn cross(o: PointUm, a: PointUm, b: PointUm) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Minimal convex polygon around `points` (Andrew's monotone chain).
///
/// Errors with [`CoreError::DegenerateHull`] when fewer than 3 points or
/// all points are collinear; callers substitute zeroed hull features and
/// flag the neuron.
pub fn convex_hull(points: &[PointUm]) -> Result<Hull> {
    if points.len() < 3 {
        return Err(CoreError::DegenerateHull);
    }
    let mut pts: Vec<PointUm> = points.to_vec();
    pts.sort_unstable_by(|a, b| a.x.total_cmp(&b.x).then_with(|| a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    if pts.len() < 3 {
        return Err(CoreError::DegenerateHull);
    }

    let mut hull: Vec<PointUm> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop(); // first point repeated

    if hull.len() < 3 {
        return Err(CoreError::DegenerateHull);
    }

    let mut area2 = 0.0;
    let mut perimeter = 0.0;
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        area2 += a.x * b.y - b.x * a.y;
        perimeter += a.dist(&b);
    }
    let area = area2 / 2.0;
    if !(area > 0.0) {
        return Err(CoreError::DegenerateHull);
    }
    Ok(Hull {
        vertices: hull,
        area_um2: area,
        perimeter_um: perimeter,
    })
}
