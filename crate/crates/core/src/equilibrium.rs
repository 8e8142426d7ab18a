//! Stochastic network loading and SUE-logit equilibrium.
//!
//! The equilibrium program maximizes `sum_a int_0^{x_a} v_a(u) du - <f, ln f>`
//! subject to demand conservation, where `v_a` combines the endogenous BPR
//! travel time with exogenous link attributes. Path flows at the optimum
//! follow multinomial-logit shares of path utilities, so the solver
//! alternates logit loadings with convex-combination steps (Frank-Wolfe grid
//! line search, or successive averages).

use crate::error::{Error, Result};
use crate::network::{
    bpr_integral, build_incidence, k_shortest_paths, path_size_factors, IncidenceData, Network,
    OdDemand, Path, PathSet,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Utility-function coefficients: weight on travel time, weights on the
/// exogenous attribute columns, and the fixed path-size correction weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub theta_t: f64,
    pub theta_z: Vec<f64>,
    pub psl_beta: f64,
}

impl Coefficients {
    pub fn new(theta_t: f64, theta_z: Vec<f64>) -> Self {
        Coefficients {
            theta_t,
            theta_z,
            psl_beta: 1.0,
        }
    }

    pub fn zeros(num_attributes: usize) -> Self {
        Coefficients::new(0.0, vec![0.0; num_attributes])
    }

    /// Number of utility coefficients (travel time + exogenous attributes).
    pub fn dim(&self) -> usize {
        1 + self.theta_z.len()
    }

    /// Packs `[theta_t, theta_z...]` into a dense vector.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.push(self.theta_t);
        v.extend_from_slice(&self.theta_z);
        v
    }

    pub fn from_vector(values: &[f64], psl_beta: f64) -> Self {
        Coefficients {
            theta_t: values[0],
            theta_z: values[1..].to_vec(),
            psl_beta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta_t.is_finite()
            || self.theta_z.iter().any(|t| !t.is_finite())
            || !self.psl_beta.is_finite()
            || self.psl_beta < 0.0
        {
            return Err(Error::Domain("non-finite or invalid coefficients".into()));
        }
        Ok(())
    }
}

/// Incidence matrices plus per-path cached quantities for one path set:
/// log path-size factors and per-attribute path totals.
#[derive(Debug, Clone)]
pub struct PathSpace {
    path_set: PathSet,
    incidence: IncidenceData,
    ln_path_size: Vec<f64>,
    /// `path_attributes[k][h]`: total of exogenous attribute `k` along path `h`.
    path_attributes: Vec<Vec<f64>>,
}

impl PathSpace {
    pub fn new(network: &Network, od: &OdDemand, path_set: PathSet) -> Result<Self> {
        let incidence = build_incidence(network, &path_set, od)?;
        let lengths: Vec<f64> = network.links().iter().map(|l| l.length).collect();
        let mut ln_path_size = Vec::with_capacity(path_set.total_paths());
        for od_paths in path_set.per_od() {
            if od_paths.is_empty() {
                return Err(Error::Structure(
                    "every OD pair must carry at least one path".into(),
                ));
            }
            let ps = path_size_factors(od_paths, &lengths)?;
            ln_path_size.extend(ps.into_iter().map(|v| v.ln()));
        }
        let path_attributes = (0..network.num_attributes())
            .map(|k| incidence.path_totals(&network.attribute_column(k)))
            .collect();
        Ok(PathSpace {
            path_set,
            incidence,
            ln_path_size,
            path_attributes,
        })
    }

    pub fn path_set(&self) -> &PathSet {
        &self.path_set
    }

    pub fn incidence(&self) -> &IncidenceData {
        &self.incidence
    }

    pub fn ln_path_size(&self) -> &[f64] {
        &self.ln_path_size
    }

    pub fn num_paths(&self) -> usize {
        self.incidence.num_paths()
    }

    /// Per-path totals of exogenous attribute `k`.
    pub fn path_attribute(&self, k: usize) -> &[f64] {
        &self.path_attributes[k]
    }

    /// Per-path travel times under the given link times.
    pub fn path_times(&self, times: &[f64]) -> Vec<f64> {
        self.incidence.path_totals(times)
    }
}

/// Link utilities `v = theta_t * t + Z theta_z`.
pub fn link_utilities(coeffs: &Coefficients, times: &[f64], network: &Network) -> Result<Vec<f64>> {
    coeffs.validate()?;
    if times.len() != network.num_links() || coeffs.theta_z.len() != network.num_attributes() {
        return Err(Error::Structure(format!(
            "dimension mismatch: {} times / {} links, {} weights / {} attributes",
            times.len(),
            network.num_links(),
            coeffs.theta_z.len(),
            network.num_attributes()
        )));
    }
    Ok((0..network.num_links())
        .map(|a| {
            let exo: f64 = coeffs
                .theta_z
                .iter()
                .enumerate()
                .map(|(k, w)| w * network.attribute(a, k))
                .sum();
            coeffs.theta_t * times[a] + exo
        })
        .collect())
}

/// Multinomial-logit path probabilities from link utilities.
///
/// Path utility is the sum of link utilities plus `psl_beta * ln PS_h`; the
/// softmax is evaluated per OD with a max-utility shift, which preserves the
/// probabilities exactly while avoiding overflow.
pub fn path_probabilities(
    link_utils: &[f64],
    incidence: &IncidenceData,
    ln_path_size: &[f64],
    psl_beta: f64,
) -> Result<Vec<f64>> {
    let path_utilities: Vec<f64> = incidence
        .path_totals(link_utils)
        .iter()
        .zip(ln_path_size)
        .map(|(v, lps)| v + psl_beta * lps)
        .collect();
    softmax_per_od(&path_utilities, incidence)
}

/// Per-OD softmax of path utilities.
pub fn softmax_per_od(path_utilities: &[f64], incidence: &IncidenceData) -> Result<Vec<f64>> {
    let mut p = vec![0.0; path_utilities.len()];
    for w in 0..incidence.num_ods() {
        let range = incidence.od_range(w);
        if range.is_empty() {
            return Err(Error::Structure(format!("OD {w} has an empty path set")));
        }
        let max = path_utilities[range.clone()]
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut denom = 0.0;
        for h in range.clone() {
            let e = (path_utilities[h] - max).exp();
            p[h] = e;
            denom += e;
        }
        for h in range {
            p[h] /= denom;
        }
    }
    Ok(p)
}

/// Output of one stochastic network loading pass.
#[derive(Debug, Clone)]
pub struct Loading {
    pub link_flows: Vec<f64>,
    pub path_flows: Vec<f64>,
    pub probabilities: Vec<f64>,
}

/// One-shot mapping from utilities to path probabilities, path flows and
/// link flows at fixed travel times.
pub fn stochastic_network_loading(
    coeffs: &Coefficients,
    space: &PathSpace,
    q: &[f64],
    times: &[f64],
    network: &Network,
) -> Result<Loading> {
    let v = link_utilities(coeffs, times, network)?;
    let p = path_probabilities(&v, space.incidence(), space.ln_path_size(), coeffs.psl_beta)?;
    let demands = space.incidence().path_demands(q);
    let f: Vec<f64> = p.iter().zip(&demands).map(|(p, q)| p * q).collect();
    let x = space.incidence().link_flows(&f);
    Ok(Loading {
        link_flows: x,
        path_flows: f,
        probabilities: p,
    })
}

/// Entropy term `<f, ln f>` with the `0 ln 0 = 0` convention.
fn entropy_term(path_flows: &[f64]) -> f64 {
    path_flows
        .iter()
        .filter(|&&f| f > 0.0)
        .map(|&f| f * f.ln())
        .sum()
}

/// Value of the equilibrium program at `(x, f)`:
/// `sum_a [theta_t * int_0^{x_a} t_a + x_a * (Z theta_z)_a] - <f, ln f>`.
pub fn inner_objective(
    network: &Network,
    coeffs: &Coefficients,
    link_flows: &[f64],
    path_flows: &[f64],
) -> Result<f64> {
    let mut total = 0.0;
    for (a, link) in network.links().iter().enumerate() {
        let exo: f64 = coeffs
            .theta_z
            .iter()
            .enumerate()
            .map(|(k, w)| w * network.attribute(a, k))
            .sum();
        total += coeffs.theta_t * bpr_integral(link, link_flows[a])? + link_flows[a] * exo;
    }
    Ok(total - entropy_term(path_flows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    FrankWolfe,
    Msa,
}

/// Starting loading for the equilibrium iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialLoading {
    /// Logit loading at free-flow travel times.
    FreeFlow,
    /// Uniform split of each OD demand over its paths.
    Uniform,
    /// Random per-OD simplex weights (seeded).
    Random(u64),
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub method: SolveMethod,
    /// Grid granularity of the Frank-Wolfe line search on [0, 1].
    pub lambda_step: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub initial: InitialLoading,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            method: SolveMethod::FrankWolfe,
            lambda_step: 0.01,
            max_iterations: 100,
            tolerance: 1e-4,
            initial: InitialLoading::FreeFlow,
        }
    }
}

impl SolverOptions {
    /// Tight settings for ground-truth solves, where downstream fits are
    /// limited by the equilibrium fixed-point gap.
    pub fn tight() -> Self {
        SolverOptions {
            tolerance: 1e-8,
            max_iterations: 1000,
            ..SolverOptions::default()
        }
    }
}

/// Link flows, path flows, probabilities and travel times at (approximate)
/// SUE-logit, with the objective trace of the solver.
#[derive(Debug, Clone)]
pub struct EquilibriumState {
    pub link_flows: Vec<f64>,
    pub path_flows: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub travel_times: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

fn initial_path_flows(
    space: &PathSpace,
    q: &[f64],
    coeffs: &Coefficients,
    network: &Network,
    initial: InitialLoading,
) -> Result<Vec<f64>> {
    match initial {
        InitialLoading::FreeFlow => {
            let t0 = network.free_flow_times();
            Ok(stochastic_network_loading(coeffs, space, q, &t0, network)?.path_flows)
        }
        InitialLoading::Uniform => {
            let inc = space.incidence();
            let mut f = vec![0.0; inc.num_paths()];
            for w in 0..inc.num_ods() {
                let range = inc.od_range(w);
                let share = q[w] / range.len() as f64;
                for h in range {
                    f[h] = share;
                }
            }
            Ok(f)
        }
        InitialLoading::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inc = space.incidence();
            let mut f = vec![0.0; inc.num_paths()];
            for w in 0..inc.num_ods() {
                let range = inc.od_range(w);
                let weights: Vec<f64> = range.clone().map(|_| rng.gen_range(0.05..1.0)).collect();
                let total: f64 = weights.iter().sum();
                for (h, wgt) in range.zip(weights) {
                    f[h] = q[w] * wgt / total;
                }
            }
            Ok(f)
        }
    }
}

/// Fixed-point computation of SUE-logit: alternates logit loadings at the
/// current travel times with convex-combination steps until the objective or
/// the link flows stabilize.
pub fn solve_sue_logit(
    network: &Network,
    od: &OdDemand,
    space: &PathSpace,
    coeffs: &Coefficients,
    options: &SolverOptions,
) -> Result<EquilibriumState> {
    if options.lambda_step <= 0.0 || options.lambda_step > 1.0 {
        return Err(Error::Config("lambda step must lie in (0, 1]".into()));
    }
    let q = od.demand_vector();
    let mut f = initial_path_flows(space, &q, coeffs, network, options.initial)?;
    let mut x = space.incidence().link_flows(&f);
    let mut t = network.travel_times(&x)?;
    let mut objective = inner_objective(network, coeffs, &x, &f)?;
    let mut trace = vec![objective];
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=options.max_iterations {
        iterations = iter;
        let loading = stochastic_network_loading(coeffs, space, &q, &t, network)?;
        let y = loading.path_flows;

        // Fixed-point test: re-loading at the current travel times
        // reproduces the flows within tolerance, so accept the loading
        // itself (exact when travel times are flow-insensitive).
        let flow_scale = x.iter().cloned().fold(1.0, f64::max);
        let fixed_point_gap = x
            .iter()
            .zip(&loading.link_flows)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / flow_scale;
        if fixed_point_gap < options.tolerance {
            f = y;
            x = loading.link_flows;
            t = network.travel_times(&x)?;
            objective = inner_objective(network, coeffs, &x, &f)?;
            trace.push(objective);
            converged = true;
            break;
        }

        let f_new: Vec<f64> = match options.method {
            SolveMethod::FrankWolfe => {
                // Grid line search over convex combinations of the previous
                // iterate and the fresh loading; the program is maximized.
                let evaluate = |lambda: f64| -> Result<f64> {
                    let cand: Vec<f64> = f
                        .iter()
                        .zip(&y)
                        .map(|(fo, yo)| lambda * fo + (1.0 - lambda) * yo)
                        .collect();
                    let xc = space.incidence().link_flows(&cand);
                    inner_objective(network, coeffs, &xc, &cand)
                };
                let steps = (1.0 / options.lambda_step).round() as usize;
                let mut best = (f64::NEG_INFINITY, 0.0);
                for s in 0..=steps {
                    let lambda = (s as f64 * options.lambda_step).min(1.0);
                    let val = evaluate(lambda)?;
                    if val > best.0 {
                        best = (val, lambda);
                    }
                }
                // Ternary refinement inside the best grid cell: the blend
                // objective is concave in lambda, and the grid alone cannot
                // resolve combination weights below its resolution.
                let mut lo = (best.1 - options.lambda_step).max(0.0);
                let mut hi = (best.1 + options.lambda_step).min(1.0);
                for _ in 0..60 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    if evaluate(m1)? < evaluate(m2)? {
                        lo = m1;
                    } else {
                        hi = m2;
                    }
                }
                let refined = 0.5 * (lo + hi);
                let lambda = if evaluate(refined)? > best.0 {
                    refined
                } else {
                    best.1
                };
                f.iter()
                    .zip(&y)
                    .map(|(fo, yo)| lambda * fo + (1.0 - lambda) * yo)
                    .collect()
            }
            SolveMethod::Msa => {
                let step = 1.0 / (1.0 + iter as f64);
                f.iter()
                    .zip(&y)
                    .map(|(fo, yo)| (1.0 - step) * fo + step * yo)
                    .collect()
            }
        };

        let x_new = space.incidence().link_flows(&f_new);
        let new_objective = inner_objective(network, coeffs, &x_new, &f_new)?;
        let flow_change = x
            .iter()
            .zip(&x_new)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / flow_scale;
        let obj_change = (new_objective - objective).abs() / (1.0 + objective.abs());

        f = f_new;
        x = x_new;
        t = network.travel_times(&x)?;
        objective = new_objective;
        trace.push(objective);

        // Iterates stopped moving without certifying the fixed point: stop,
        // but leave the state flagged as non-converged.
        if obj_change < options.tolerance && flow_change < options.tolerance {
            break;
        }
    }

    let v = link_utilities(coeffs, &t, network)?;
    let p = path_probabilities(&v, space.incidence(), space.ln_path_size(), coeffs.psl_beta)?;
    Ok(EquilibriumState {
        link_flows: x,
        path_flows: f,
        probabilities: p,
        travel_times: t,
        objective_trace: trace,
        converged,
        iterations,
    })
}

/// Adds up to `k_g` fresh utility-shortest paths to each OD in `od_subset`,
/// dropping duplicates. Returns the number of paths added.
pub fn column_generation_step(
    network: &Network,
    od: &OdDemand,
    paths: &mut PathSet,
    coeffs: &Coefficients,
    times: &[f64],
    od_subset: &[usize],
    k_g: usize,
) -> Result<usize> {
    if k_g == 0 || od_subset.is_empty() {
        return Ok(0);
    }
    let v = link_utilities(coeffs, times, network)?;
    let costs: Vec<f64> = v.iter().map(|u| -u).collect();
    let pairs: Vec<(usize, usize)> = od_subset
        .iter()
        .map(|&w| {
            let p = od.pairs()[w];
            (p.origin, p.destination)
        })
        .collect();
    let outcome = k_shortest_paths(network, &costs, &pairs, k_g)?;
    let mut added = 0;
    let mut per_od: Vec<Vec<Path>> = paths.per_od().to_vec();
    for (&w, candidates) in od_subset.iter().zip(outcome.per_pair) {
        let mut merged = PathSet::new(vec![std::mem::take(&mut per_od[w])]);
        added += merged.merge(0, candidates);
        per_od[w] = merged.per_od()[0].clone();
    }
    *paths = PathSet::new(per_od);
    Ok(added)
}

/// Prunes each affected OD to its `k_s` highest-utility paths (path utility
/// includes the path-size correction under the current set). Every OD keeps
/// at least one path. Returns the number of paths removed.
pub fn path_selection_step(
    network: &Network,
    paths: &mut PathSet,
    coeffs: &Coefficients,
    times: &[f64],
    k_s: usize,
    od_subset: Option<&[usize]>,
) -> Result<usize> {
    if k_s == 0 {
        return Err(Error::Config("path selection requires k_s >= 1".into()));
    }
    let v = link_utilities(coeffs, times, network)?;
    let lengths: Vec<f64> = network.links().iter().map(|l| l.length).collect();
    let all: Vec<usize> = (0..paths.num_ods()).collect();
    let affected = od_subset.unwrap_or(&all);
    let mut per_od: Vec<Vec<Path>> = paths.per_od().to_vec();
    let mut removed = 0;
    for &w in affected {
        let od_paths = &per_od[w];
        if od_paths.len() <= k_s {
            continue;
        }
        let ps = path_size_factors(od_paths, &lengths)?;
        let mut scored: Vec<(f64, &Path)> = od_paths
            .iter()
            .zip(&ps)
            .map(|(path, size)| {
                let utility: f64 = path.links.iter().map(|&a| v[a]).sum::<f64>()
                    + coeffs.psl_beta * size.ln();
                (utility, path)
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        let kept: Vec<Path> = scored.into_iter().take(k_s).map(|(_, p)| p.clone()).collect();
        removed += per_od[w].len() - kept.len();
        per_od[w] = kept;
    }
    *paths = PathSet::new(per_od);
    Ok(removed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Link, OdPair};

    fn link(id: usize, from: usize, to: usize, t0: f64, cap: f64) -> Link {
        Link::new(id, from, to, t0, cap).unwrap()
    }

    fn toy(symmetric: bool) -> (Network, OdDemand, PathSpace) {
        let t4 = if symmetric { 2.0 } else { 3.0 };
        let mut links = vec![
            link(0, 1, 3, 1.0, 300.0),
            link(1, 2, 3, 1.0, 300.0),
            link(2, 3, 4, 2.0, 150.0),
            link(3, 3, 4, t4, 150.0),
        ];
        // Unit lengths keep the path-size factors constant within each OD.
        links.iter_mut().for_each(|l| l.length = 1.0);
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
        let space = PathSpace::new(&network, &od, paths).unwrap();
        (network, od, space)
    }

    #[test]
    fn utilities_linear_combination() {
        let links = vec![link(0, 1, 2, 10.0, 100.0), link(1, 1, 2, 12.0, 100.0)];
        let network = Network::with_attributes(
            links,
            vec![vec![1.0], vec![0.0]],
            vec!["cost".into()],
        )
        .unwrap();
        let zero = Coefficients::zeros(1);
        let v = link_utilities(&zero, &[10.0, 12.0], &network).unwrap();
        assert_eq!(v, vec![0.0, 0.0]);
        let coeffs = Coefficients::new(-1.0, vec![-6.0]);
        let v = link_utilities(&coeffs, &[10.0, 12.0], &network).unwrap();
        assert_eq!(v, vec![-16.0, -12.0]);
    }

    #[test]
    fn utilities_dimension_mismatch() {
        let network = Network::new(vec![link(0, 1, 2, 1.0, 1.0)]).unwrap();
        let coeffs = Coefficients::new(-1.0, vec![]);
        assert!(link_utilities(&coeffs, &[1.0, 2.0], &network).is_err());
    }

    #[test]
    fn probabilities_match_softmax() {
        let (_, _, space) = toy(true);
        // Equal utilities split 50/50 in each OD.
        let p = path_probabilities(&[0.0; 4], space.incidence(), &[0.0; 6], 0.0).unwrap();
        for w in 0..3 {
            let range = space.incidence().od_range(w);
            for h in range {
                assert!((p[h] - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn probabilities_three_path_softmax() {
        let links = vec![
            link(0, 1, 2, 1.0, 1.0),
            link(1, 1, 2, 2.0, 1.0),
            link(2, 1, 2, 3.0, 1.0),
        ];
        let network = Network::new(links).unwrap();
        let od =
            OdDemand::new(vec![OdPair { origin: 1, destination: 2, demand: 1.0 }]).unwrap();
        let paths = PathSet::new(vec![vec![
            Path::new(vec![0]),
            Path::new(vec![1]),
            Path::new(vec![2]),
        ]]);
        let space = PathSpace::new(&network, &od, paths).unwrap();
        let p = path_probabilities(&[-1.0, -2.0, -3.0], space.incidence(), &[0.0; 3], 0.0)
            .unwrap();
        assert!((p[0] - 0.66524).abs() < 1e-5);
        assert!((p[1] - 0.24473).abs() < 1e-5);
        assert!((p[2] - 0.09003).abs() < 1e-5);
    }

    #[test]
    fn sigmoid_choice_between_two_paths() {
        let links = vec![link(0, 1, 2, 5.0, 1.0), link(1, 1, 2, 5.0, 1.0)];
        let network = Network::with_attributes(
            links,
            vec![vec![1.0], vec![0.0]],
            vec!["cost".into()],
        )
        .unwrap();
        let od =
            OdDemand::new(vec![OdPair { origin: 1, destination: 2, demand: 1.0 }]).unwrap();
        let paths = PathSet::new(vec![vec![Path::new(vec![0]), Path::new(vec![1])]]);
        let space = PathSpace::new(&network, &od, paths).unwrap();
        for theta_c in [-2.0, 0.0, 1.5] {
            let coeffs = Coefficients::new(0.0, vec![theta_c]);
            let v = link_utilities(&coeffs, &[5.0, 5.0], &network).unwrap();
            let p = path_probabilities(&v, space.incidence(), &[0.0, 0.0], 0.0).unwrap();
            let sigma = 1.0 / (1.0 + (-theta_c as f64).exp());
            assert!((p[0] - sigma).abs() < 1e-12);
        }
    }

    #[test]
    fn loading_on_toy_network() {
        let (network, od, space) = toy(false);
        let q = od.demand_vector();
        let t0 = network.free_flow_times();
        for theta_t in [-0.5, -3.0] {
            let coeffs = Coefficients::new(theta_t, vec![]);
            let l = stochastic_network_loading(&coeffs, &space, &q, &t0, &network).unwrap();
            // Feeder links carry their whole OD demand regardless of theta.
            assert!((l.link_flows[0] - 50.0).abs() < 1e-9);
            assert!((l.link_flows[1] - 100.0).abs() < 1e-9);
        }
        let zero = Coefficients::zeros(0);
        let l = stochastic_network_loading(&zero, &space, &q, &t0, &network).unwrap();
        assert!((l.link_flows[2] - 150.0).abs() < 1e-9);
        assert!((l.link_flows[3] - 150.0).abs() < 1e-9);
    }

    #[test]
    fn loading_single_path() {
        let links = vec![link(0, 1, 2, 1.0, 10.0), link(1, 2, 3, 1.0, 10.0)];
        let network = Network::new(links).unwrap();
        let od =
            OdDemand::new(vec![OdPair { origin: 1, destination: 3, demand: 100.0 }]).unwrap();
        let paths = PathSet::new(vec![vec![Path::new(vec![0, 1])]]);
        let space = PathSpace::new(&network, &od, paths).unwrap();
        let coeffs = Coefficients::new(-1.0, vec![]);
        let l = stochastic_network_loading(
            &coeffs,
            &space,
            &od.demand_vector(),
            &network.free_flow_times(),
            &network,
        )
        .unwrap();
        assert_eq!(l.path_flows, vec![100.0]);
        assert_eq!(l.link_flows, vec![100.0, 100.0]);
    }

    #[test]
    fn objective_is_pure_entropy_at_zero_coefficients() {
        let (network, od, space) = toy(false);
        let q = od.demand_vector();
        let inc = space.incidence();
        let mut f = vec![0.0; inc.num_paths()];
        for w in 0..inc.num_ods() {
            let range = inc.od_range(w);
            let share = q[w] / range.len() as f64;
            for h in range {
                f[h] = share;
            }
        }
        let x = inc.link_flows(&f);
        let zero = Coefficients::zeros(0);
        let value = inner_objective(&network, &zero, &x, &f).unwrap();
        let entropy: f64 = f.iter().map(|&fi| fi * fi.ln()).sum();
        assert!((value + entropy).abs() < 1e-10);
    }

    #[test]
    fn objective_endogenous_term_matches_quadrature() {
        let (network, od, space) = toy(false);
        let q = od.demand_vector();
        let coeffs = Coefficients::new(-1.0, vec![]);
        let t0 = network.free_flow_times();
        let l = stochastic_network_loading(&coeffs, &space, &q, &t0, &network).unwrap();
        let analytic = inner_objective(&network, &coeffs, &l.link_flows, &l.path_flows).unwrap();
        // Simpson quadrature of the BPR integrand, 1000 panels per link.
        let mut numeric = -entropy_term(&l.path_flows);
        for (a, link) in network.links().iter().enumerate() {
            let x = l.link_flows[a];
            let n = 1000;
            let h = x / n as f64;
            let mut s = 0.0;
            for i in 0..n {
                let u0 = i as f64 * h;
                let u1 = u0 + h;
                let um = 0.5 * (u0 + u1);
                s += h / 6.0
                    * (crate::network::bpr_travel_time(link, u0).unwrap()
                        + 4.0 * crate::network::bpr_travel_time(link, um).unwrap()
                        + crate::network::bpr_travel_time(link, u1).unwrap());
            }
            numeric += coeffs.theta_t * s;
        }
        assert!(
            (analytic - numeric).abs() / numeric.abs() < 1e-8,
            "analytic {analytic} vs quadrature {numeric}"
        );
    }

    #[test]
    fn equilibrium_uncongested_equals_single_loading() {
        let mut links = vec![
            link(0, 1, 3, 1.0, 300.0),
            link(1, 2, 3, 1.0, 300.0),
            link(2, 3, 4, 2.0, 150.0),
            link(3, 3, 4, 3.0, 150.0),
        ];
        // Demand far below capacity: inflate capacities.
        for l in &mut links {
            l.capacity *= 1e4;
        }
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
        let space = PathSpace::new(&network, &od, paths).unwrap();
        let coeffs = Coefficients::new(-1.0, vec![]);
        let state =
            solve_sue_logit(&network, &od, &space, &coeffs, &SolverOptions::default()).unwrap();
        let snl = stochastic_network_loading(
            &coeffs,
            &space,
            &od.demand_vector(),
            &network.free_flow_times(),
            &network,
        )
        .unwrap();
        for (a, b) in state.link_flows.iter().zip(&snl.link_flows) {
            assert!((a - b).abs() < 1e-3, "{a} vs {b}");
        }
    }

    #[test]
    fn equilibrium_symmetric_parallel_links_split_evenly() {
        let (network, od, space) = toy(true);
        for theta_t in [-0.5, -2.0, -8.0] {
            let coeffs = Coefficients::new(theta_t, vec![]);
            let state =
                solve_sue_logit(&network, &od, &space, &coeffs, &SolverOptions::default())
                    .unwrap();
            assert!(
                (state.link_flows[2] - state.link_flows[3]).abs() < 1e-6,
                "theta_t={theta_t}: {} vs {}",
                state.link_flows[2],
                state.link_flows[3]
            );
        }
    }

    #[test]
    fn equilibrium_exact_with_exogenous_times() {
        let mut links = vec![
            link(0, 1, 3, 1.0, 300.0),
            link(1, 2, 3, 1.0, 300.0),
            link(2, 3, 4, 2.0, 150.0),
            link(3, 3, 4, 3.0, 150.0),
        ];
        for l in &mut links {
            l.bpr_alpha = 0.0;
        }
        let network = Network::new(links).unwrap();
        let od = OdDemand::new(vec![OdPair { origin: 3, destination: 4, demand: 150.0 }])
            .unwrap();
        let paths = PathSet::new(vec![vec![Path::new(vec![2]), Path::new(vec![3])]]);
        let space = PathSpace::new(&network, &od, paths).unwrap();
        let coeffs = Coefficients::new(-1.0, vec![]);
        let state =
            solve_sue_logit(&network, &od, &space, &coeffs, &SolverOptions::default()).unwrap();
        let snl = stochastic_network_loading(
            &coeffs,
            &space,
            &od.demand_vector(),
            &network.free_flow_times(),
            &network,
        )
        .unwrap();
        assert_eq!(state.link_flows, snl.link_flows);
        assert!(state.converged);
    }

    #[test]
    fn column_generation_noop_cases() {
        let (network, od, space) = toy(false);
        let mut paths = space.path_set().clone();
        let before = paths.total_paths();
        let coeffs = Coefficients::new(-1.0, vec![]);
        let t = network.free_flow_times();
        let added =
            column_generation_step(&network, &od, &mut paths, &coeffs, &t, &[], 5).unwrap();
        assert_eq!(added, 0);
        let added =
            column_generation_step(&network, &od, &mut paths, &coeffs, &t, &[0, 1, 2], 0)
                .unwrap();
        assert_eq!(added, 0);
        assert_eq!(paths.total_paths(), before);
    }

    #[test]
    fn column_generation_recovers_missing_best_path() {
        let (network, od, _) = toy(false);
        // OD (1,4) starts with only the slower route {a1, a4}.
        let mut paths = PathSet::new(vec![
            vec![Path::new(vec![0, 3])],
            vec![Path::new(vec![1, 2]), Path::new(vec![1, 3])],
            vec![Path::new(vec![2]), Path::new(vec![3])],
        ]);
        let coeffs = Coefficients::new(-1.0, vec![]);
        let t = network.free_flow_times();
        let added =
            column_generation_step(&network, &od, &mut paths, &coeffs, &t, &[0], 1).unwrap();
        assert_eq!(added, 1);
        assert!(paths.od_paths(0).contains(&Path::new(vec![0, 2])));
    }

    #[test]
    fn path_selection_keeps_top_utilities() {
        let links = vec![
            link(0, 1, 2, 1.0, 1.0),
            link(1, 1, 2, 2.0, 1.0),
            link(2, 1, 2, 3.0, 1.0),
        ];
        let network = Network::new(links).unwrap();
        let mut paths = PathSet::new(vec![vec![
            Path::new(vec![0]),
            Path::new(vec![1]),
            Path::new(vec![2]),
        ]]);
        let coeffs = Coefficients {
            theta_t: -1.0,
            theta_z: vec![],
            psl_beta: 0.0,
        };
        let t = network.free_flow_times();
        // k_s not binding: unchanged.
        let removed =
            path_selection_step(&network, &mut paths, &coeffs, &t, 3, None).unwrap();
        assert_eq!(removed, 0);
        let removed =
            path_selection_step(&network, &mut paths, &coeffs, &t, 2, None).unwrap();
        assert_eq!(removed, 1);
        assert_eq!(
            paths.od_paths(0),
            &[Path::new(vec![0]), Path::new(vec![1])]
        );
    }
}
