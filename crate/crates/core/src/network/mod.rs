//! Network representation: links with BPR performance functions, travel
//! demand, path sets and the sparse link/OD incidence matrices used by the
//! loading and estimation routines.

mod yen;

pub use yen::k_shortest_paths;

use crate::error::{Error, Result};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::ops::Range;

/// A directed road segment with BPR travel-time parameters.
///
/// Times are in minutes, capacities in vehicles/hour. `is_connector` marks
/// centroid connectors, which carry flow but no exogenous attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub id: usize,
    pub from_node: usize,
    pub to_node: usize,
    pub free_flow_time: f64,
    pub capacity: f64,
    pub bpr_alpha: f64,
    pub bpr_beta: f64,
    pub length: f64,
    pub is_connector: bool,
}

impl Link {
    pub fn new(
        id: usize,
        from_node: usize,
        to_node: usize,
        free_flow_time: f64,
        capacity: f64,
    ) -> Result<Self> {
        let link = Link {
            id,
            from_node,
            to_node,
            free_flow_time,
            capacity,
            bpr_alpha: 0.15,
            bpr_beta: 4.0,
            length: free_flow_time,
            is_connector: false,
        };
        link.validate()?;
        Ok(link)
    }

    pub fn validate(&self) -> Result<()> {
        if self.from_node == self.to_node {
            return Err(Error::Structure(format!(
                "link {} is a self-loop at node {}",
                self.id, self.from_node
            )));
        }
        if !(self.free_flow_time > 0.0) || !(self.capacity > 0.0) {
            return Err(Error::Domain(format!(
                "link {}: free-flow time and capacity must be positive",
                self.id
            )));
        }
        if self.bpr_alpha < 0.0 || self.bpr_beta < 1.0 || self.length < 0.0 {
            return Err(Error::Domain(format!(
                "link {}: require alpha >= 0, beta >= 1, length >= 0",
                self.id
            )));
        }
        Ok(())
    }
}

/// BPR link travel time `t0 * (1 + alpha * (x / capacity)^beta)` in minutes.
pub fn bpr_travel_time(link: &Link, flow: f64) -> Result<f64> {
    if !(flow >= 0.0) {
        return Err(Error::Domain(format!(
            "negative or NaN flow {flow} on link {}",
            link.id
        )));
    }
    Ok(link.free_flow_time * (1.0 + link.bpr_alpha * (flow / link.capacity).powf(link.bpr_beta)))
}

/// Closed-form antiderivative of [`bpr_travel_time`] with respect to flow,
/// evaluated at `flow` (zero at zero flow).
pub fn bpr_integral(link: &Link, flow: f64) -> Result<f64> {
    if !(flow >= 0.0) {
        return Err(Error::Domain(format!(
            "negative or NaN flow {flow} on link {}",
            link.id
        )));
    }
    let b = link.bpr_beta;
    Ok(link.free_flow_time * flow
        + link.free_flow_time * link.bpr_alpha * flow.powf(b + 1.0)
            / ((b + 1.0) * link.capacity.powf(b)))
}

/// Directed network with per-link exogenous attribute matrix `Z` (|A| x |K_Z|).
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<usize>,
    node_index: BTreeMap<usize, usize>,
    links: Vec<Link>,
    attributes: Vec<Vec<f64>>,
    attribute_names: Vec<String>,
    /// Outgoing (link index, head node index) lists per node index.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Network {
    pub fn new(links: Vec<Link>) -> Result<Self> {
        let k = 0;
        Self::with_attributes(links, vec![], (0..k).map(|_| String::new()).collect())
    }

    pub fn with_attributes(
        links: Vec<Link>,
        attributes: Vec<Vec<f64>>,
        attribute_names: Vec<String>,
    ) -> Result<Self> {
        let mut node_set = BTreeSet::new();
        for link in &links {
            link.validate()?;
            node_set.insert(link.from_node);
            node_set.insert(link.to_node);
        }
        if !attributes.is_empty() && attributes.len() != links.len() {
            return Err(Error::Structure(format!(
                "attribute matrix has {} rows but network has {} links",
                attributes.len(),
                links.len()
            )));
        }
        for (a, row) in attributes.iter().enumerate() {
            if row.len() != attribute_names.len() {
                return Err(Error::Structure(format!(
                    "attribute row {} has {} entries, expected {}",
                    a,
                    row.len(),
                    attribute_names.len()
                )));
            }
            if row.iter().any(|z| !z.is_finite()) {
                return Err(Error::Domain(format!(
                    "non-finite attribute value on link row {a}"
                )));
            }
            if links[a].is_connector && row.iter().any(|&z| z != 0.0) {
                return Err(Error::Structure(format!(
                    "connector link {} must have an all-zero attribute row",
                    links[a].id
                )));
            }
        }
        let nodes: Vec<usize> = node_set.into_iter().collect();
        let node_index: BTreeMap<usize, usize> =
            nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (idx, link) in links.iter().enumerate() {
            let from = node_index[&link.from_node];
            let to = node_index[&link.to_node];
            adjacency[from].push((idx, to));
        }
        for out in &mut adjacency {
            out.sort_by_key(|&(idx, _)| idx);
        }
        Ok(Network {
            nodes,
            node_index,
            links,
            attributes,
            attribute_names,
            adjacency,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, idx: usize) -> &Link {
        &self.links[idx]
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn node_position(&self, node: usize) -> Option<usize> {
        self.node_index.get(&node).copied()
    }

    pub(crate) fn adjacency(&self) -> &[Vec<(usize, usize)>] {
        &self.adjacency
    }

    pub fn num_attributes(&self) -> usize {
        self.attribute_names.len()
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    /// Value of exogenous attribute `k` on link `a`.
    pub fn attribute(&self, a: usize, k: usize) -> f64 {
        if self.attributes.is_empty() {
            0.0
        } else {
            self.attributes[a][k]
        }
    }

    /// Column `k` of the attribute matrix as a dense vector over links.
    pub fn attribute_column(&self, k: usize) -> Vec<f64> {
        (0..self.num_links()).map(|a| self.attribute(a, k)).collect()
    }

    /// Appends an attribute column; connector rows are forced to zero.
    pub fn push_attribute(&mut self, name: &str, mut column: Vec<f64>) -> Result<()> {
        if column.len() != self.links.len() {
            return Err(Error::Structure(format!(
                "attribute column `{name}` has {} entries, expected {}",
                column.len(),
                self.links.len()
            )));
        }
        if self.attributes.is_empty() {
            self.attributes = vec![Vec::new(); self.links.len()];
        }
        for (a, value) in column.iter_mut().enumerate() {
            if self.links[a].is_connector {
                *value = 0.0;
            }
            self.attributes[a].push(*value);
        }
        self.attribute_names.push(name.to_string());
        Ok(())
    }

    /// Link travel times at the given link flows.
    pub fn travel_times(&self, flows: &[f64]) -> Result<Vec<f64>> {
        self.links
            .iter()
            .zip(flows)
            .map(|(link, &x)| bpr_travel_time(link, x))
            .collect()
    }

    pub fn free_flow_times(&self) -> Vec<f64> {
        self.links.iter().map(|l| l.free_flow_time).collect()
    }
}

/// One origin-destination pair with its hourly demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdPair {
    pub origin: usize,
    pub destination: usize,
    pub demand: f64,
}

/// Ordered list of OD pairs; the ordering fixes the rows of the OD-path
/// incidence matrix.
#[derive(Debug, Clone, Default)]
pub struct OdDemand {
    pairs: Vec<OdPair>,
}

impl OdDemand {
    pub fn new(pairs: Vec<OdPair>) -> Result<Self> {
        let mut seen = HashSet::new();
        for p in &pairs {
            if !(p.demand >= 0.0) {
                return Err(Error::Domain(format!(
                    "negative demand for OD ({}, {})",
                    p.origin, p.destination
                )));
            }
            if !seen.insert((p.origin, p.destination)) {
                return Err(Error::Structure(format!(
                    "duplicate OD pair ({}, {})",
                    p.origin, p.destination
                )));
            }
        }
        Ok(OdDemand { pairs })
    }

    pub fn pairs(&self) -> &[OdPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Dense demand vector over the pair ordering.
    pub fn demand_vector(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.demand).collect()
    }

    pub fn total_demand(&self) -> f64 {
        self.pairs.iter().map(|p| p.demand).sum()
    }

    pub fn scaled(&self, factor: f64) -> OdDemand {
        OdDemand {
            pairs: self
                .pairs
                .iter()
                .map(|p| OdPair {
                    demand: p.demand * factor,
                    ..*p
                })
                .collect(),
        }
    }

    pub fn with_demands(&self, demands: &[f64]) -> Result<OdDemand> {
        if demands.len() != self.pairs.len() {
            return Err(Error::Structure(
                "demand vector length does not match OD pair count".into(),
            ));
        }
        OdDemand::new(
            self.pairs
                .iter()
                .zip(demands)
                .map(|(p, &q)| OdPair { demand: q, ..*p })
                .collect(),
        )
    }
}

/// A path as an ordered sequence of link indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub links: Vec<usize>,
}

impl Path {
    pub fn new(links: Vec<usize>) -> Self {
        Path { links }
    }
}

/// Per-OD path lists. The global path ordering is the concatenation of the
/// per-OD lists in OD order.
#[derive(Debug, Clone, Default)]
pub struct PathSet {
    per_od: Vec<Vec<Path>>,
}

impl PathSet {
    pub fn new(per_od: Vec<Vec<Path>>) -> Self {
        PathSet { per_od }
    }

    pub fn per_od(&self) -> &[Vec<Path>] {
        &self.per_od
    }

    pub fn od_paths(&self, w: usize) -> &[Path] {
        &self.per_od[w]
    }

    pub fn num_ods(&self) -> usize {
        self.per_od.len()
    }

    pub fn total_paths(&self) -> usize {
        self.per_od.iter().map(|p| p.len()).sum()
    }

    /// Iterate paths in global order together with their OD index.
    pub fn iter_global(&self) -> impl Iterator<Item = (usize, &Path)> {
        self.per_od
            .iter()
            .enumerate()
            .flat_map(|(w, paths)| paths.iter().map(move |p| (w, p)))
    }

    /// Merges candidate paths into OD `w`, dropping duplicates. Returns the
    /// number of paths actually added.
    pub fn merge(&mut self, w: usize, candidates: Vec<Path>) -> usize {
        let existing: HashSet<Path> = self.per_od[w].iter().cloned().collect();
        let mut added = 0;
        for c in candidates {
            if !existing.contains(&c) && !self.per_od[w].contains(&c) {
                self.per_od[w].push(c);
                added += 1;
            }
        }
        added
    }

    /// Validates each path against the network and OD endpoints.
    pub fn validate(&self, network: &Network, od: &OdDemand) -> Result<()> {
        if self.per_od.len() != od.len() {
            return Err(Error::Structure(format!(
                "path set covers {} ODs but demand lists {}",
                self.per_od.len(),
                od.len()
            )));
        }
        for (w, pair) in od.pairs().iter().enumerate() {
            if pair.demand > 0.0 && self.per_od[w].is_empty() {
                return Err(Error::Structure(format!(
                    "OD ({}, {}) has positive demand but no paths",
                    pair.origin, pair.destination
                )));
            }
            let mut seen = HashSet::new();
            for path in &self.per_od[w] {
                if path.links.is_empty() {
                    return Err(Error::Structure("empty path".into()));
                }
                let mut at = pair.origin;
                for &a in &path.links {
                    let link = network
                        .links()
                        .get(a)
                        .ok_or_else(|| Error::Structure(format!("unknown link index {a}")))?;
                    if link.from_node != at {
                        return Err(Error::Structure(format!(
                            "path for OD ({}, {}) is not connected head-to-tail",
                            pair.origin, pair.destination
                        )));
                    }
                    at = link.to_node;
                }
                if at != pair.destination {
                    return Err(Error::Structure(format!(
                        "path for OD ({}, {}) ends at node {}",
                        pair.origin, pair.destination, at
                    )));
                }
                if !seen.insert(path.clone()) {
                    return Err(Error::Structure(format!(
                        "duplicate path within OD ({}, {})",
                        pair.origin, pair.destination
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Binary sparse matrix in compressed-column form (all stored entries are 1).
#[derive(Debug, Clone)]
pub struct SparseBinaryMatrix {
    pub rows: usize,
    pub cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
}

impl SparseBinaryMatrix {
    pub fn from_columns(rows: usize, columns: &[Vec<usize>]) -> Self {
        let mut col_ptr = Vec::with_capacity(columns.len() + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        for col in columns {
            row_idx.extend_from_slice(col);
            col_ptr.push(row_idx.len());
        }
        SparseBinaryMatrix {
            rows,
            cols: columns.len(),
            col_ptr,
            row_idx,
        }
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.row_idx[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    /// y = M v (dense result over rows).
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        for j in 0..self.cols {
            let vj = v[j];
            if vj != 0.0 {
                for &i in self.column(j) {
                    y[i] += vj;
                }
            }
        }
        y
    }

    /// y = M^T v (dense result over columns).
    pub fn mul_transpose_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .map(|j| self.column(j).iter().map(|&i| v[i]).sum())
            .collect()
    }
}

/// Link-path (`delta_x`) and OD-path (`delta_q`) incidence matrices for a
/// path set, with the per-OD column ranges of the global path ordering.
#[derive(Debug, Clone)]
pub struct IncidenceData {
    pub delta_x: SparseBinaryMatrix,
    pub delta_q: SparseBinaryMatrix,
    od_ranges: Vec<Range<usize>>,
    od_of_path: Vec<usize>,
}

impl IncidenceData {
    pub fn num_paths(&self) -> usize {
        self.delta_x.cols
    }

    pub fn num_links(&self) -> usize {
        self.delta_x.rows
    }

    pub fn num_ods(&self) -> usize {
        self.delta_q.rows
    }

    pub fn od_range(&self, w: usize) -> Range<usize> {
        self.od_ranges[w].clone()
    }

    pub fn od_ranges(&self) -> &[Range<usize>] {
        &self.od_ranges
    }

    pub fn od_of_path(&self, h: usize) -> usize {
        self.od_of_path[h]
    }

    /// Links traversed by global path `h` (the nonzeros of column `h` of
    /// `delta_x`).
    pub fn path_links(&self, h: usize) -> &[usize] {
        self.delta_x.column(h)
    }

    /// x = delta_x f.
    pub fn link_flows(&self, path_flows: &[f64]) -> Vec<f64> {
        self.delta_x.mul_vec(path_flows)
    }

    /// delta_x^T v: per-path sums of a link-level quantity (path travel time
    /// from link times, path attribute totals from link attributes).
    pub fn path_totals(&self, link_values: &[f64]) -> Vec<f64> {
        self.delta_x.mul_transpose_vec(link_values)
    }

    /// Demand of the OD that owns each path: delta_q^T q.
    pub fn path_demands(&self, q: &[f64]) -> Vec<f64> {
        (0..self.num_paths()).map(|h| q[self.od_of_path[h]]).collect()
    }
}

/// Builds the incidence matrices for a validated path set.
pub fn build_incidence(
    network: &Network,
    paths: &PathSet,
    od: &OdDemand,
) -> Result<IncidenceData> {
    paths.validate(network, od)?;
    let mut x_cols = Vec::with_capacity(paths.total_paths());
    let mut q_cols = Vec::with_capacity(paths.total_paths());
    let mut od_ranges = Vec::with_capacity(od.len());
    let mut od_of_path = Vec::with_capacity(paths.total_paths());
    let mut offset = 0;
    for (w, od_paths) in paths.per_od().iter().enumerate() {
        od_ranges.push(offset..offset + od_paths.len());
        for path in od_paths {
            x_cols.push(path.links.clone());
            q_cols.push(vec![w]);
            od_of_path.push(w);
        }
        offset += od_paths.len();
    }
    Ok(IncidenceData {
        delta_x: SparseBinaryMatrix::from_columns(network.num_links(), &x_cols),
        delta_q: SparseBinaryMatrix::from_columns(od.len(), &q_cols),
        od_ranges,
        od_of_path,
    })
}

/// Path-size factors for the paths of one OD consideration set.
///
/// `PS_h = sum_{a in h} (len_a / L_h) / N_a` where `N_a` counts the paths in
/// the set using link `a`. Zero-length links (connectors) contribute nothing.
pub fn path_size_factors(paths: &[Path], link_lengths: &[f64]) -> Result<Vec<f64>> {
    if paths.is_empty() {
        return Err(Error::Structure("empty path list".into()));
    }
    let mut usage: BTreeMap<usize, usize> = BTreeMap::new();
    for path in paths {
        for &a in &path.links {
            *usage.entry(a).or_insert(0) += 1;
        }
    }
    paths
        .iter()
        .map(|path| {
            let total: f64 = path.links.iter().map(|&a| link_lengths[a]).sum();
            if total <= 0.0 {
                return Err(Error::Degenerate(
                    "path has zero total length; cannot compute path-size factor".into(),
                ));
            }
            let ps = path
                .links
                .iter()
                .map(|&a| link_lengths[a] / total / usage[&a] as f64)
                .sum();
            Ok(ps)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link(id: usize, from: usize, to: usize, t0: f64, cap: f64) -> Link {
        Link::new(id, from, to, t0, cap).unwrap()
    }

    fn toy() -> (Network, OdDemand, PathSet) {
        let links = vec![
            link(0, 1, 3, 1.0, 200.0),
            link(1, 2, 3, 1.0, 200.0),
            link(2, 3, 4, 2.0, 150.0),
            link(3, 3, 4, 3.0, 150.0),
        ];
        let network = Network::new(links).unwrap();
        let od = OdDemand::new(vec![
            OdPair { origin: 1, destination: 4, demand: 50.0 },
            OdPair { origin: 2, destination: 4, demand: 100.0 },
            OdPair { origin: 3, destination: 4, demand: 150.0 },
        ])
        .unwrap();
        let paths = PathSet::new(vec![
            vec![Path::new(vec![0, 2]), Path::new(vec![0, 3])],
            vec![Path::new(vec![1, 2]), Path::new(vec![1, 3])],
            vec![Path::new(vec![2]), Path::new(vec![3])],
        ]);
        (network, od, paths)
    }

    #[test]
    fn bpr_time_matches_hand_values() {
        let l = Link {
            id: 0,
            from_node: 1,
            to_node: 2,
            free_flow_time: 10.0,
            capacity: 100.0,
            bpr_alpha: 0.15,
            bpr_beta: 4.0,
            length: 10.0,
            is_connector: false,
        };
        assert_eq!(bpr_travel_time(&l, 0.0).unwrap(), 10.0);
        assert!((bpr_travel_time(&l, 100.0).unwrap() - 11.5).abs() < 1e-12);
        assert!((bpr_travel_time(&l, 200.0).unwrap() - 34.0).abs() < 1e-12);
        assert!(bpr_travel_time(&l, -1.0).is_err());
    }

    #[test]
    fn bpr_integral_matches_hand_value_and_derivative() {
        let l = Link {
            id: 0,
            from_node: 1,
            to_node: 2,
            free_flow_time: 10.0,
            capacity: 100.0,
            bpr_alpha: 0.15,
            bpr_beta: 4.0,
            length: 10.0,
            is_connector: false,
        };
        assert_eq!(bpr_integral(&l, 0.0).unwrap(), 0.0);
        assert!((bpr_integral(&l, 100.0).unwrap() - 1030.0).abs() < 1e-9);
        // Central finite difference of the antiderivative reproduces the
        // travel-time function.
        let h = 1e-4;
        let fd = (bpr_integral(&l, 50.0 + h).unwrap() - bpr_integral(&l, 50.0 - h).unwrap())
            / (2.0 * h);
        let t = bpr_travel_time(&l, 50.0).unwrap();
        assert!((fd - t).abs() / t < 1e-8, "fd {fd} vs analytic {t}");
    }

    #[test]
    fn incidence_on_toy_network() {
        let (network, od, paths) = toy();
        let inc = build_incidence(&network, &paths, &od).unwrap();
        assert_eq!(inc.num_ods(), 3);
        assert_eq!(inc.num_paths(), 6);
        // Row sums of delta_q are the per-OD path counts.
        let row_sums = inc.delta_q.mul_vec(&vec![1.0; 6]);
        assert_eq!(row_sums, vec![2.0, 2.0, 2.0]);
        // Every column of delta_q has exactly one nonzero.
        for h in 0..6 {
            assert_eq!(inc.delta_q.column(h).len(), 1);
        }
    }

    #[test]
    fn incidence_single_path() {
        let links = vec![link(0, 1, 2, 1.0, 10.0), link(1, 2, 3, 1.0, 10.0)];
        let network = Network::new(links).unwrap();
        let od = OdDemand::new(vec![OdPair { origin: 1, destination: 3, demand: 100.0 }]).unwrap();
        let paths = PathSet::new(vec![vec![Path::new(vec![0, 1])]]);
        let inc = build_incidence(&network, &paths, &od).unwrap();
        assert_eq!(inc.path_links(0), &[0, 1]);
        assert_eq!(inc.delta_q.column(0), &[0]);
        let x = inc.link_flows(&[100.0]);
        assert_eq!(x, vec![100.0, 100.0]);
    }

    #[test]
    fn incidence_rejects_unknown_link() {
        let (network, od, _) = toy();
        let bad = PathSet::new(vec![
            vec![Path::new(vec![0, 9])],
            vec![Path::new(vec![1, 2])],
            vec![Path::new(vec![2])],
        ]);
        assert!(build_incidence(&network, &bad, &od).is_err());
    }

    #[test]
    fn path_size_examples() {
        // Disjoint paths need no correction.
        let lengths = vec![1.0, 1.0, 1.0, 1.0];
        let ps = path_size_factors(
            &[Path::new(vec![0, 1]), Path::new(vec![2, 3])],
            &lengths,
        )
        .unwrap();
        assert_eq!(ps, vec![1.0, 1.0]);
        // Two identical paths halve the factor.
        let ps = path_size_factors(&[Path::new(vec![0, 1]), Path::new(vec![0, 1])], &lengths)
            .unwrap();
        assert_eq!(ps, vec![0.5, 0.5]);
        // Shared first link, distinct second link.
        let ps = path_size_factors(&[Path::new(vec![0, 2]), Path::new(vec![0, 3])], &lengths)
            .unwrap();
        assert!((ps[0] - 0.75).abs() < 1e-12);
        assert!((ps[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn path_size_rejects_zero_length_path() {
        let lengths = vec![0.0, 0.0];
        assert!(matches!(
            path_size_factors(&[Path::new(vec![0, 1])], &lengths),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn od_rejects_duplicates_and_negative_demand() {
        assert!(OdDemand::new(vec![
            OdPair { origin: 1, destination: 2, demand: 1.0 },
            OdPair { origin: 1, destination: 2, demand: 2.0 },
        ])
        .is_err());
        assert!(OdDemand::new(vec![OdPair { origin: 1, destination: 2, demand: -1.0 }]).is_err());
    }
}
