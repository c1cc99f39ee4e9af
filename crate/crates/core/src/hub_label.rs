//! Pruned landmark hub labels over the visibility graph.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::visibility::VisibilityGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HubLabel {
    pub hub: usize,
    pub dist: f64,
    /// Next vertex from the owner toward `hub` on a shortest path.
    pub next_hop: usize,
}

/// Per-vertex label lists, each sorted by hub id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HubLabelSet {
    pub labels: Vec<Vec<HubLabel>>,
}

/// Total order on distances for heap use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dist(pub f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Descending degree, ties by ascending id.
pub fn vertex_ordering(g: &VisibilityGraph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by_key(|&v| (Reverse(g.degree(v)), v));
    order
}

pub fn build_hub_labels(g: &VisibilityGraph, order: &[usize]) -> HubLabelSet {
    let n = g.len();
    let mut labels: Vec<Vec<HubLabel>> = vec![Vec::new(); n];
    // distance from the current hub to each of its own hubs, for pruning
    let mut hub_dist = vec![f64::INFINITY; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut touched = Vec::new();
    let mut heap = BinaryHeap::new();

    for &h in order {
        for l in &labels[h] {
            hub_dist[l.hub] = l.dist;
        }
        dist[h] = 0.0;
        parent[h] = h;
        touched.push(h);
        heap.push(Reverse((Dist(0.0), h)));
        while let Some(Reverse((Dist(d), w))) = heap.pop() {
            if d > dist[w] {
                continue;
            }
            let certified = labels[w]
                .iter()
                .map(|l| l.dist + hub_dist[l.hub])
                .fold(f64::INFINITY, f64::min);
            if certified <= d {
                continue;
            }
            labels[w].push(HubLabel {
                hub: h,
                dist: d,
                next_hop: parent[w],
            });
            if w == h {
                hub_dist[h] = 0.0;
            }
            for &(x, len) in &g.adj[w] {
                let nd = d + len;
                if nd < dist[x] {
                    if dist[x].is_infinite() {
                        touched.push(x);
                    }
                    dist[x] = nd;
                    parent[x] = w;
                    heap.push(Reverse((Dist(nd), x)));
                }
            }
        }
        for &v in &touched {
            dist[v] = f64::INFINITY;
            parent[v] = usize::MAX;
        }
        touched.clear();
        for l in &labels[h] {
            hub_dist[l.hub] = f64::INFINITY;
        }
    }
    for list in &mut labels {
        list.sort_by_key(|l| l.hub);
    }
    HubLabelSet { labels }
}

/// Minimum `a.dist + b.dist` over common hubs by one merge pass; ties keep
/// the smaller hub id.
pub fn hl_distance(a: &[HubLabel], b: &[HubLabel]) -> Option<(f64, usize)> {
    let (mut i, mut j) = (0, 0);
    let mut best: Option<(f64, usize)> = None;
    while i < a.len() && j < b.len() {
        match a[i].hub.cmp(&b[j].hub) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                let d = a[i].dist + b[j].dist;
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, a[i].hub));
                }
                i += 1;
                j += 1;
            }
        }
    }
    best
}

impl HubLabelSet {
    pub fn of(&self, v: usize) -> &[HubLabel] {
        &self.labels[v]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn total_labels(&self) -> usize {
        self.labels.iter().map(Vec::len).sum()
    }

    pub fn distance(&self, u: usize, v: usize) -> Option<(f64, usize)> {
        hl_distance(&self.labels[u], &self.labels[v])
    }

    pub fn label(&self, v: usize, hub: usize) -> Option<&HubLabel> {
        let list = &self.labels[v];
        list.binary_search_by_key(&hub, |l| l.hub)
            .ok()
            .map(|i| &list[i])
    }

    /// Walk from `v` to `hub` along next hops, both ends included.
    pub fn walk_to_hub(&self, v: usize, hub: usize) -> Result<Vec<usize>> {
        let mut path = vec![v];
        let mut cur = v;
        while cur != hub {
            let l = self.label(cur, hub).ok_or_else(|| {
                Error::Invalid(format!("vertex {cur} lacks a label for hub {hub}"))
            })?;
            cur = l.next_hop;
            path.push(cur);
            if path.len() > self.labels.len() + 1 {
                return Err(Error::Invalid("next-hop cycle".into()));
            }
        }
        Ok(path)
    }
}

/// Vertex sequence of a shortest `u`-`v` path through their meeting hub.
pub fn unfold_path(labels: &HubLabelSet, u: usize, v: usize) -> Result<Vec<usize>> {
    let (_, hub) = labels
        .distance(u, v)
        .ok_or_else(|| Error::Unreachable(format!("vertices {u} and {v}")))?;
    let mut path = labels.walk_to_hub(u, hub)?;
    let mut back = labels.walk_to_hub(v, hub)?;
    back.pop();
    path.extend(back.into_iter().rev());
    Ok(path)
}
