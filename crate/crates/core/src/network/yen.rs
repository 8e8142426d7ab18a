//! Yen-style k-shortest simple paths over nonnegative link costs, used for
//! initial path generation and for column generation under utility costs.

use super::{Network, Path};
use crate::error::{Error, Result};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

/// Result of a k-shortest-path search over a set of OD pairs.
#[derive(Debug, Clone)]
pub struct KspOutcome {
    /// One (possibly empty) path list per requested OD pair, each sorted by
    /// nondecreasing cost with lexicographic link-sequence tie-breaking.
    pub per_pair: Vec<Vec<Path>>,
    /// OD pairs for which no path exists.
    pub disconnected: Vec<(usize, usize)>,
}

/// Up to `k` acyclic minimum-cost paths for each requested OD pair.
///
/// Costs must be finite. Negative costs (utility-based costs) are shifted by
/// the most negative value before the search so that Dijkstra applies; the
/// shift preserves the ranking only approximately for paths of unequal link
/// counts, so callers re-score candidates exactly afterwards.
pub fn k_shortest_paths(
    network: &Network,
    link_costs: &[f64],
    od_pairs: &[(usize, usize)],
    k: usize,
) -> Result<KspOutcome> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if link_costs.len() != network.num_links() {
        return Err(Error::Structure(format!(
            "cost vector has {} entries for {} links",
            link_costs.len(),
            network.num_links()
        )));
    }
    if link_costs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Domain("link costs must be finite".into()));
    }
    let min_cost = link_costs.iter().cloned().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = if min_cost < 0.0 {
        link_costs.iter().map(|c| c - min_cost).collect()
    } else {
        link_costs.to_vec()
    };

    let mut per_pair = Vec::with_capacity(od_pairs.len());
    let mut disconnected = Vec::new();
    for &(origin, destination) in od_pairs {
        let paths = match (
            network.node_position(origin),
            network.node_position(destination),
        ) {
            (Some(s), Some(t)) => yen(network, &shifted, s, t, k),
            _ => Vec::new(),
        };
        if paths.is_empty() {
            disconnected.push((origin, destination));
        }
        per_pair.push(paths.into_iter().map(Path::new).collect());
    }
    Ok(KspOutcome {
        per_pair,
        disconnected,
    })
}

fn path_cost(costs: &[f64], links: &[usize]) -> f64 {
    links.iter().map(|&a| costs[a]).sum()
}

fn yen(network: &Network, costs: &[f64], source: usize, target: usize, k: usize) -> Vec<Vec<usize>> {
    let no_nodes = vec![false; network.num_nodes()];
    let no_links = vec![false; network.num_links()];
    let first = match dijkstra(network, costs, source, target, &no_nodes, &no_links) {
        Some(p) => p,
        None => return Vec::new(),
    };
    let mut accepted: Vec<Vec<usize>> = vec![first];
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = accepted.iter().cloned().collect();

    while accepted.len() < k {
        let prev = accepted.last().unwrap().clone();
        let mut banned_nodes = vec![false; network.num_nodes()];
        for i in 0..prev.len() {
            // Spur node: head of the root prefix prev[..i].
            let spur_node = if i == 0 {
                source
            } else {
                network.node_position(network.link(prev[i - 1]).to_node).unwrap()
            };
            let root = &prev[..i];
            let mut banned_links = vec![false; network.num_links()];
            for path in &accepted {
                if path.len() > i && path[..i] == *root {
                    banned_links[path[i]] = true;
                }
            }
            if let Some(spur) =
                dijkstra(network, costs, spur_node, target, &banned_nodes, &banned_links)
            {
                let mut full = root.to_vec();
                full.extend(spur);
                if seen.insert(full.clone()) {
                    candidates.push(full);
                }
            }
            // Nodes of the root prefix may not be revisited by later spurs.
            banned_nodes[spur_node] = true;
        }
        if candidates.is_empty() {
            break;
        }
        let best = candidates
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                path_cost(costs, a)
                    .total_cmp(&path_cost(costs, b))
                    .then_with(|| a.cmp(b))
            })
            .map(|(i, _)| i)
            .unwrap();
        accepted.push(candidates.swap_remove(best));
    }
    accepted.sort_by(|a, b| {
        path_cost(costs, a)
            .total_cmp(&path_cost(costs, b))
            .then_with(|| a.cmp(b))
    });
    accepted
}

#[derive(PartialEq)]
struct HeapKey(f64, usize);

impl Eq for HeapKey {}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Dijkstra over node indices; returns the link sequence of a minimum-cost
/// path. Ties prefer the smaller incoming link index, for reproducibility.
fn dijkstra(
    network: &Network,
    costs: &[f64],
    source: usize,
    target: usize,
    banned_nodes: &[bool],
    banned_links: &[bool],
) -> Option<Vec<usize>> {
    if banned_nodes[source] {
        return None;
    }
    let n = network.num_nodes();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse(HeapKey(0.0, source)));
    while let Some(Reverse(HeapKey(d, u))) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if u == target {
            break;
        }
        for &(link_idx, v) in &network.adjacency()[u] {
            if banned_links[link_idx] || banned_nodes[v] || settled[v] {
                continue;
            }
            let nd = d + costs[link_idx];
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = Some((u, link_idx));
                heap.push(Reverse(HeapKey(nd, v)));
            } else if nd == dist[v] {
                if let Some((_, stored)) = pred[v] {
                    if link_idx < stored {
                        pred[v] = Some((u, link_idx));
                    }
                }
            }
        }
    }
    if !settled[target] {
        return None;
    }
    let mut links = Vec::new();
    let mut at = target;
    while at != source {
        let (prev, link_idx) = pred[at]?;
        links.push(link_idx);
        at = prev;
    }
    links.reverse();
    Some(links)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Link;

    #[test]
    fn parallel_links_both_returned() {
        let links = vec![
            Link::new(0, 1, 2, 5.0, 100.0).unwrap(),
            Link::new(1, 1, 2, 5.0, 100.0).unwrap(),
        ];
        let network = Network::new(links).unwrap();
        let out = k_shortest_paths(&network, &[1.0, 1.0], &[(1, 2)], 2).unwrap();
        assert_eq!(out.per_pair[0], vec![Path::new(vec![0]), Path::new(vec![1])]);
        assert!(out.disconnected.is_empty());
    }

    #[test]
    fn toy_unit_costs() {
        let links = vec![
            Link::new(0, 1, 3, 1.0, 1.0).unwrap(),
            Link::new(1, 2, 3, 1.0, 1.0).unwrap(),
            Link::new(2, 3, 4, 1.0, 1.0).unwrap(),
            Link::new(3, 3, 4, 1.0, 1.0).unwrap(),
        ];
        let network = Network::new(links).unwrap();
        let out = k_shortest_paths(&network, &[1.0; 4], &[(1, 4)], 2).unwrap();
        assert_eq!(
            out.per_pair[0],
            vec![Path::new(vec![0, 2]), Path::new(vec![0, 3])]
        );
    }

    #[test]
    fn disconnected_pair_reports_warning() {
        let links = vec![Link::new(0, 1, 2, 1.0, 1.0).unwrap()];
        let network = Network::new(links).unwrap();
        let out = k_shortest_paths(&network, &[1.0], &[(2, 1)], 3).unwrap();
        assert!(out.per_pair[0].is_empty());
        assert_eq!(out.disconnected, vec![(2, 1)]);
    }

    #[test]
    fn paths_are_acyclic_and_ordered() {
        // Small grid with a shortcut; enumerate several alternatives.
        let links = vec![
            Link::new(0, 1, 2, 1.0, 1.0).unwrap(),
            Link::new(1, 2, 3, 1.0, 1.0).unwrap(),
            Link::new(2, 1, 4, 1.0, 1.0).unwrap(),
            Link::new(3, 4, 3, 1.0, 1.0).unwrap(),
            Link::new(4, 2, 4, 1.0, 1.0).unwrap(),
            Link::new(5, 4, 2, 1.0, 1.0).unwrap(),
        ];
        let network = Network::new(links).unwrap();
        let costs = [1.0, 2.0, 1.5, 1.0, 0.5, 0.5];
        let out = k_shortest_paths(&network, &costs, &[(1, 3)], 10).unwrap();
        let paths = &out.per_pair[0];
        assert!(!paths.is_empty());
        let mut prev_cost = f64::NEG_INFINITY;
        for p in paths {
            let c: f64 = p.links.iter().map(|&a| costs[a]).sum();
            assert!(c >= prev_cost - 1e-12);
            prev_cost = c;
            // No repeated nodes.
            let mut nodes = vec![network.link(p.links[0]).from_node];
            for &a in &p.links {
                nodes.push(network.link(a).to_node);
            }
            let unique: std::collections::HashSet<_> = nodes.iter().collect();
            assert_eq!(unique.len(), nodes.len(), "cycle in {:?}", p.links);
        }
    }

    #[test]
    fn negative_costs_are_shifted() {
        let links = vec![
            Link::new(0, 1, 2, 1.0, 1.0).unwrap(),
            Link::new(1, 1, 2, 1.0, 1.0).unwrap(),
        ];
        let network = Network::new(links).unwrap();
        let out = k_shortest_paths(&network, &[-3.0, -1.0], &[(1, 2)], 1).unwrap();
        // Link 0 is cheaper after the shift (0 vs 2).
        assert_eq!(out.per_pair[0], vec![Path::new(vec![0])]);
    }
}
