//! Builtin benchmark networks, the synthetic data-generating process and the
//! seeded Monte Carlo experiment harness.

use crate::equilibrium::{
    solve_sue_logit, Coefficients, EquilibriumState, PathSpace, SolverOptions,
};
use crate::error::{Error, Result};
use crate::estimation::{
    bilevel_optimization, EstimationOptions, ObservedCounts,
};
use crate::inference::{estimate_sigma2, coefficient_covariance, t_test};
use crate::network::{k_shortest_paths, Link, Network, OdDemand, OdPair, PathSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::Serialize;
use std::str::FromStr;

const SIOUXFALLS_NET: &str = include_str!("../assets/siouxfalls_net.tntp");
const SIOUXFALLS_TRIPS: &str = include_str!("../assets/siouxfalls_trips.tntp");
/// Seed for the Sioux Falls exogenous attribute fixture (cost, intersections).
const SIOUXFALLS_ATTRIBUTE_SEED: u64 = 24_76_528;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinNetwork {
    Toy,
    Wang,
    LoChan,
    Yang,
    SiouxFalls,
}

impl FromStr for BuiltinNetwork {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "toy" => Ok(BuiltinNetwork::Toy),
            "wang" => Ok(BuiltinNetwork::Wang),
            "lochan" | "lo-chan" => Ok(BuiltinNetwork::LoChan),
            "yang" => Ok(BuiltinNetwork::Yang),
            "siouxfalls" | "sioux-falls" => Ok(BuiltinNetwork::SiouxFalls),
            other => Err(Error::UnknownNetwork(other.to_string())),
        }
    }
}

impl BuiltinNetwork {
    pub const ALL: [BuiltinNetwork; 5] = [
        BuiltinNetwork::Toy,
        BuiltinNetwork::Wang,
        BuiltinNetwork::LoChan,
        BuiltinNetwork::Yang,
        BuiltinNetwork::SiouxFalls,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BuiltinNetwork::Toy => "toy",
            BuiltinNetwork::Wang => "wang",
            BuiltinNetwork::LoChan => "lochan",
            BuiltinNetwork::Yang => "yang",
            BuiltinNetwork::SiouxFalls => "siouxfalls",
        }
    }

    /// The four benchmark networks small enough for exhaustive path sets.
    pub const SMALL: [BuiltinNetwork; 4] = [
        BuiltinNetwork::Toy,
        BuiltinNetwork::Wang,
        BuiltinNetwork::LoChan,
        BuiltinNetwork::Yang,
    ];
}

fn link(id: usize, from: usize, to: usize, t0: f64, cap: f64) -> Link {
    Link {
        id,
        from_node: from,
        to_node: to,
        free_flow_time: t0,
        capacity: cap,
        bpr_alpha: 0.15,
        bpr_beta: 4.0,
        length: t0,
        is_connector: false,
    }
}

/// Enumerates acyclic paths per OD pair (k-shortest search with a large k is
/// exhaustive for simple paths), optionally truncated to the `cap` cheapest
/// paths by free-flow time.
fn enumerate_paths(network: &Network, od: &OdDemand, cap: Option<usize>) -> Result<PathSet> {
    let costs = network.free_flow_times();
    let pairs: Vec<(usize, usize)> = od
        .pairs()
        .iter()
        .map(|p| (p.origin, p.destination))
        .collect();
    let k = cap.unwrap_or(10_000);
    let outcome = k_shortest_paths(network, &costs, &pairs, k)?;
    if !outcome.disconnected.is_empty() {
        return Err(Error::Structure(format!(
            "disconnected OD pairs: {:?}",
            outcome.disconnected
        )));
    }
    Ok(PathSet::new(outcome.per_pair))
}

fn toy_network() -> Result<(Network, OdDemand, PathSet)> {
    let mut links = vec![
        link(0, 1, 3, 1.0, 300.0),
        link(1, 2, 3, 1.5, 300.0),
        link(2, 3, 4, 2.0, 200.0),
        link(3, 3, 4, 3.0, 200.0),
    ];
    // Unit lengths: the parallel routes differ in time but not in the
    // path-size correction, so a zero utility splits demand evenly.
    links.iter_mut().for_each(|l| l.length = 1.0);
    let network = Network::new(links)?;
    let od = OdDemand::new(vec![
        OdPair { origin: 1, destination: 4, demand: 50.0 },
        OdPair { origin: 2, destination: 4, demand: 100.0 },
        OdPair { origin: 3, destination: 4, demand: 150.0 },
    ])?;
    let paths = enumerate_paths(&network, &od, None)?;
    Ok((network, od, paths))
}

fn wang_network() -> Result<(Network, OdDemand, PathSet)> {
    let links = vec![
        link(0, 2, 1, 1.00, 450.0),
        link(1, 1, 2, 0.50, 550.0),
        link(2, 3, 4, 0.75, 300.0),
        link(3, 4, 3, 0.50, 450.0),
        link(4, 4, 1, 0.50, 250.0),
        link(5, 1, 4, 1.00, 550.0),
        link(6, 2, 3, 0.50, 350.0),
        link(7, 3, 2, 1.50, 550.0),
    ];
    let network = Network::new(links)?;
    let od = OdDemand::new(vec![
        OdPair { origin: 1, destination: 2, demand: 110.0 },
        OdPair { origin: 1, destination: 3, demand: 140.0 },
        OdPair { origin: 1, destination: 4, demand: 90.0 },
        OdPair { origin: 2, destination: 1, demand: 100.0 },
        OdPair { origin: 2, destination: 3, demand: 85.0 },
        OdPair { origin: 2, destination: 4, demand: 125.0 },
        OdPair { origin: 3, destination: 1, demand: 95.0 },
        OdPair { origin: 3, destination: 2, demand: 120.0 },
        OdPair { origin: 3, destination: 4, demand: 105.0 },
        OdPair { origin: 4, destination: 1, demand: 80.0 },
        OdPair { origin: 4, destination: 2, demand: 130.0 },
        OdPair { origin: 4, destination: 3, demand: 115.0 },
    ])?;
    let paths = enumerate_paths(&network, &od, None)?;
    Ok((network, od, paths))
}

fn lochan_network() -> Result<(Network, OdDemand, PathSet)> {
    let links = vec![
        link(0, 1, 2, 1.60, 500.0),
        link(1, 2, 1, 1.70, 500.0),
        link(2, 2, 3, 1.40, 500.0),
        link(3, 3, 2, 1.50, 500.0),
        link(4, 3, 6, 1.20, 450.0),
        link(5, 6, 3, 1.30, 450.0),
        link(6, 6, 5, 1.55, 500.0),
        link(7, 5, 6, 1.45, 500.0),
        link(8, 5, 4, 1.50, 500.0),
        link(9, 4, 5, 1.40, 500.0),
        link(10, 4, 1, 1.25, 450.0),
        link(11, 1, 4, 1.35, 450.0),
        link(12, 2, 5, 1.15, 500.0),
        link(13, 5, 2, 1.20, 500.0),
    ];
    let network = Network::new(links)?;
    let od = OdDemand::new(vec![
        OdPair { origin: 1, destination: 3, demand: 120.0 },
        OdPair { origin: 1, destination: 4, demand: 90.0 },
        OdPair { origin: 1, destination: 6, demand: 140.0 },
        OdPair { origin: 3, destination: 1, demand: 110.0 },
        OdPair { origin: 3, destination: 4, demand: 130.0 },
        OdPair { origin: 3, destination: 6, demand: 85.0 },
        OdPair { origin: 4, destination: 1, demand: 95.0 },
        OdPair { origin: 4, destination: 3, demand: 105.0 },
        OdPair { origin: 4, destination: 6, demand: 125.0 },
        OdPair { origin: 6, destination: 1, demand: 115.0 },
        OdPair { origin: 6, destination: 3, demand: 80.0 },
        OdPair { origin: 6, destination: 4, demand: 100.0 },
    ])?;
    let paths = enumerate_paths(&network, &od, None)?;
    Ok((network, od, paths))
}

fn yang_links() -> Vec<Link> {
    vec![
        link(0, 1, 2, 1.5, 250.0),
        link(1, 1, 4, 3.5, 400.0),
        link(2, 1, 5, 3.5, 250.0),
        link(3, 2, 3, 1.5, 300.0),
        link(4, 2, 5, 2.5, 250.0),
        link(5, 3, 6, 1.5, 300.0),
        link(6, 4, 5, 1.5, 400.0),
        link(7, 4, 7, 1.0, 200.0),
        link(8, 5, 6, 3.0, 300.0),
        link(9, 5, 8, 1.0, 200.0),
        link(10, 5, 9, 1.0, 250.0),
        link(11, 6, 9, 1.5, 250.0),
        link(12, 7, 8, 2.5, 250.0),
        link(13, 8, 9, 1.0, 200.0),
    ]
}

/// Demand on the nine Yang OD pairs, in the pair order returned by
/// [`yang_od_pairs`].
pub fn yang_true_demands() -> [f64; 9] {
    [120.0, 150.0, 100.0, 130.0, 200.0, 90.0, 80.0, 180.0, 110.0]
}

/// Distorted reference demand for the robustness scenario.
pub fn yang_distorted_demands() -> [f64; 9] {
    [100.0, 130.0, 120.0, 120.0, 170.0, 140.0, 110.0, 170.0, 105.0]
}

pub fn yang_od_pairs() -> [(usize, usize); 9] {
    [
        (1, 6),
        (1, 8),
        (1, 9),
        (2, 6),
        (2, 8),
        (2, 9),
        (4, 6),
        (4, 8),
        (4, 9),
    ]
}

/// Indices of the five monitored Yang links: (3,6), (5,6), (5,8), (5,9), (7,8).
pub fn yang_observed_links() -> [usize; 5] {
    [5, 8, 9, 10, 12]
}

fn yang_od(demands: &[f64; 9]) -> Result<OdDemand> {
    OdDemand::new(
        yang_od_pairs()
            .iter()
            .zip(demands)
            .map(|(&(origin, destination), &demand)| OdPair {
                origin,
                destination,
                demand,
            })
            .collect(),
    )
}

fn yang_network() -> Result<(Network, OdDemand, PathSet)> {
    let network = Network::new(yang_links())?;
    let od = yang_od(&yang_true_demands())?;
    // Consideration sets are capped at the six cheapest free-flow routes;
    // only the densest OD pair exceeds the cap.
    let paths = enumerate_paths(&network, &od, Some(6))?;
    Ok((network, od, paths))
}

fn siouxfalls_network() -> Result<(Network, OdDemand, PathSet)> {
    let links = crate::io::parse_tntp_network(SIOUXFALLS_NET, "siouxfalls_net.tntp")?;
    // Exogenous attribute fixture: per-link monetary cost (uniform on [0, 1])
    // and intersection count (Poisson with mean 2), deterministic by seed.
    let mut rng = ChaCha8Rng::seed_from_u64(SIOUXFALLS_ATTRIBUTE_SEED);
    let cost: Vec<f64> = (0..links.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    let poisson = Poisson::new(2.0).expect("valid Poisson mean");
    let intersections: Vec<f64> = (0..links.len()).map(|_| poisson.sample(&mut rng)).collect();
    let attributes: Vec<Vec<f64>> = cost
        .iter()
        .zip(&intersections)
        .map(|(&c, &s)| vec![c, s])
        .collect();
    let network = Network::with_attributes(
        links,
        attributes,
        vec!["cost".to_string(), "intersections".to_string()],
    )?;
    let od = crate::io::parse_tntp_trips(SIOUXFALLS_TRIPS, "siouxfalls_trips.tntp")?;
    // Three distance-shortest routes per OD pair.
    let lengths: Vec<f64> = network.links().iter().map(|l| l.length).collect();
    let pairs: Vec<(usize, usize)> = od
        .pairs()
        .iter()
        .map(|p| (p.origin, p.destination))
        .collect();
    let outcome = k_shortest_paths(&network, &lengths, &pairs, 3)?;
    if !outcome.disconnected.is_empty() {
        return Err(Error::Structure(format!(
            "disconnected OD pairs in Sioux Falls fixture: {:?}",
            outcome.disconnected
        )));
    }
    Ok((network, od, PathSet::new(outcome.per_pair)))
}

/// Builds a named benchmark network with its demand table and path set.
pub fn builtin_network(which: BuiltinNetwork) -> Result<(Network, OdDemand, PathSet)> {
    match which {
        BuiltinNetwork::Toy => toy_network(),
        BuiltinNetwork::Wang => wang_network(),
        BuiltinNetwork::LoChan => lochan_network(),
        BuiltinNetwork::Yang => yang_network(),
        BuiltinNetwork::SiouxFalls => siouxfalls_network(),
    }
}

/// Yang network with the distorted reference OD matrix.
pub fn yang_distorted_od() -> Result<OdDemand> {
    yang_od(&yang_distorted_demands())
}

/// Data-generating process settings.
#[derive(Debug, Clone)]
pub struct DgpConfig {
    pub theta: Coefficients,
    /// Count noise sigma as a fraction of the mean true link flow.
    pub noise_std_fraction: f64,
    /// Fraction of links carrying a sensor.
    pub sensor_coverage: f64,
    /// Gaussian OD noise sigma as a fraction of the mean demand (0 = off).
    pub od_noise_fraction: f64,
    /// Uniform misscaling of the reference OD matrix (1 = none).
    pub od_scale_factor: f64,
    pub seed: u64,
    /// Standard-Gaussian attribute columns with true weight zero.
    pub irrelevant_attributes: usize,
}

impl DgpConfig {
    pub fn new(theta: Coefficients, seed: u64) -> Self {
        DgpConfig {
            theta,
            noise_std_fraction: 0.10,
            sensor_coverage: 1.0,
            od_noise_fraction: 0.0,
            od_scale_factor: 1.0,
            seed,
            irrelevant_attributes: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("noise_std_fraction", self.noise_std_fraction),
            ("sensor_coverage", self.sensor_coverage),
            ("od_noise_fraction", self.od_noise_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if !(self.od_scale_factor > 0.0) {
            return Err(Error::Config("od_scale_factor must be positive".into()));
        }
        if self.sensor_coverage == 0.0 {
            return Err(Error::Config("sensor_coverage must be positive".into()));
        }
        Ok(())
    }
}

/// Sensor mask plus Gaussian count noise on the true link flows. Negative
/// draws are kept: clipping would break the spherical-error assumptions
/// behind the inference formulas.
pub fn apply_count_noise(
    true_flows: &[f64],
    noise_std_fraction: f64,
    sensor_coverage: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, f64)> {
    let n_links = true_flows.len();
    let n_observed = ((sensor_coverage * n_links as f64).round() as usize)
        .clamp(1, n_links);
    let mut observed = rand::seq::index::sample(rng, n_links, n_observed).into_vec();
    observed.sort_unstable();
    let mean = true_flows.iter().sum::<f64>() / n_links as f64;
    let sigma = noise_std_fraction * mean;
    observed
        .into_iter()
        .map(|a| {
            let noise = if sigma > 0.0 {
                Normal::new(0.0, sigma).expect("valid sigma").sample(rng)
            } else {
                0.0
            };
            (a, true_flows[a] + noise)
        })
        .collect()
}

/// Solves the ground-truth equilibrium at `theta` and draws noisy counts
/// from it.
pub fn generate_counts(
    network: &Network,
    od: &OdDemand,
    paths: &PathSet,
    dgp: &DgpConfig,
    solver: &SolverOptions,
) -> Result<(ObservedCounts, EquilibriumState)> {
    dgp.validate()?;
    let space = PathSpace::new(network, od, paths.clone())?;
    let truth = solve_sue_logit(network, od, &space, &dgp.theta, solver)?;
    let mut rng = ChaCha8Rng::seed_from_u64(dgp.seed);
    let entries = apply_count_noise(
        &truth.link_flows,
        dgp.noise_std_fraction,
        dgp.sensor_coverage,
        &mut rng,
    );
    Ok((ObservedCounts::new(entries, network)?, truth))
}

#[derive(Debug, Clone, Copy)]
pub enum OdPerturbation {
    /// Gaussian cell noise with sigma = fraction x mean demand, truncated at
    /// zero.
    Noise(f64),
    /// Uniform scaling of every cell.
    Scale(f64),
}

pub fn perturb_od(od: &OdDemand, mode: OdPerturbation, seed: u64) -> Result<OdDemand> {
    match mode {
        OdPerturbation::Noise(fraction) => {
            if fraction < 0.0 {
                return Err(Error::Config("noise fraction must be nonnegative".into()));
            }
            if fraction == 0.0 {
                return Ok(od.clone());
            }
            let mean = od.total_demand() / od.len() as f64;
            let sigma = fraction * mean;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, sigma).expect("valid sigma");
            let demands: Vec<f64> = od
                .pairs()
                .iter()
                .map(|p| (p.demand + normal.sample(&mut rng)).max(0.0))
                .collect();
            od.with_demands(&demands)
        }
        OdPerturbation::Scale(factor) => {
            if !(factor > 0.0) {
                return Err(Error::Config("scale factor must be positive".into()));
            }
            Ok(od.scaled(factor))
        }
    }
}

/// One Monte Carlo replicate outcome.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub seed: u64,
    pub theta_hat: Vec<f64>,
    pub t_statistics: Vec<f64>,
    pub rejected: Vec<bool>,
    pub objective: f64,
    pub nrmse: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloSummary {
    pub replicates: usize,
    pub failures: usize,
    pub alpha: f64,
    pub coefficient_names: Vec<String>,
    pub theta_true: Vec<f64>,
    /// Mean estimate minus truth, per coefficient.
    pub bias: Vec<f64>,
    /// Mean value-of-time estimate minus truth (60 theta_t / theta_cost),
    /// when a cost attribute exists.
    pub vot_bias: Option<f64>,
    pub mean_nrmse: f64,
    /// Non-rejection rate for truly nonzero coefficients.
    pub false_negative_rate: f64,
    /// Rejection rate for truly zero coefficients.
    pub false_positive_rate: f64,
    pub records: Vec<ReplicateRecord>,
}

#[derive(Debug, Clone)]
pub struct MonteCarloConfig {
    pub replicates: usize,
    pub dgp: DgpConfig,
    /// Template estimation settings; `theta0` is redrawn per replicate.
    pub estimation: EstimationOptions,
    /// Freeze travel times at the ground-truth equilibrium times.
    pub exogenous_times: bool,
    /// Half-width of the uniform starting-point distribution around truth.
    pub theta0_halfwidth: f64,
    pub alpha: f64,
}

/// Runs seeded, embarrassingly parallel replicates: regenerate counts,
/// re-estimate, test every coefficient against zero, then aggregate.
/// Identical configuration and seed give identical output.
pub fn run_monte_carlo(
    network: &Network,
    od: &OdDemand,
    paths: &PathSet,
    config: &MonteCarloConfig,
) -> Result<MonteCarloSummary> {
    if config.replicates == 0 {
        return Err(Error::Config("need at least one replicate".into()));
    }
    config.dgp.validate()?;
    let space = PathSpace::new(network, od, paths.clone())?;
    let truth = solve_sue_logit(
        network,
        od,
        &space,
        &config.dgp.theta,
        &SolverOptions::tight(),
    )?;

    let mut theta_true = config.dgp.theta.to_vector();
    theta_true.extend(std::iter::repeat(0.0).take(config.dgp.irrelevant_attributes));
    let mut names = vec!["travel_time".to_string()];
    names.extend(network.attribute_names().iter().cloned());
    for j in 0..config.dgp.irrelevant_attributes {
        names.push(format!("irrelevant_{}", j + 1));
    }

    let records: Vec<ReplicateRecord> = (1..=config.replicates)
        .into_par_iter()
        .map(|r| {
            let seed = config.dgp.seed.wrapping_add(r as u64);
            match run_replicate(network, od, paths, config, &truth, &theta_true, r, seed) {
                Ok(record) => record,
                Err(e) => ReplicateRecord {
                    replicate: r,
                    seed,
                    theta_hat: vec![],
                    t_statistics: vec![],
                    rejected: vec![],
                    objective: f64::NAN,
                    nrmse: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let ok: Vec<&ReplicateRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    let failures = records.len() - ok.len();
    let dim = theta_true.len();
    let mut bias = vec![0.0; dim];
    let mut fn_num = 0usize;
    let mut fn_den = 0usize;
    let mut fp_num = 0usize;
    let mut fp_den = 0usize;
    let mut nrmse_sum = 0.0;
    let mut vot_sum = 0.0;
    let has_cost = network
        .attribute_names()
        .first()
        .map(|n| n == "cost")
        .unwrap_or(false);
    for rec in &ok {
        for d in 0..dim {
            bias[d] += rec.theta_hat[d] - theta_true[d];
            if theta_true[d] != 0.0 {
                fn_den += 1;
                if !rec.rejected[d] {
                    fn_num += 1;
                }
            } else {
                fp_den += 1;
                if rec.rejected[d] {
                    fp_num += 1;
                }
            }
        }
        nrmse_sum += rec.nrmse;
        if has_cost {
            vot_sum += 60.0 * rec.theta_hat[0] / rec.theta_hat[1];
        }
    }
    let n_ok = ok.len().max(1) as f64;
    bias.iter_mut().for_each(|b| *b /= n_ok);
    let vot_bias = if has_cost && !ok.is_empty() {
        let true_vot = 60.0 * theta_true[0] / theta_true[1];
        Some(vot_sum / n_ok - true_vot)
    } else {
        None
    };
    Ok(MonteCarloSummary {
        replicates: config.replicates,
        failures,
        alpha: config.alpha,
        coefficient_names: names,
        theta_true,
        bias,
        vot_bias,
        mean_nrmse: nrmse_sum / n_ok,
        false_negative_rate: if fn_den > 0 { fn_num as f64 / fn_den as f64 } else { 0.0 },
        false_positive_rate: if fp_den > 0 { fp_num as f64 / fp_den as f64 } else { 0.0 },
        records,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_replicate(
    network: &Network,
    od: &OdDemand,
    paths: &PathSet,
    config: &MonteCarloConfig,
    truth: &EquilibriumState,
    theta_true: &[f64],
    replicate: usize,
    seed: u64,
) -> Result<ReplicateRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Draw order is fixed: irrelevant attributes, count noise, starting
    // point, OD perturbation.
    let mut network_r = network.clone();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    for j in 0..config.dgp.irrelevant_attributes {
        let column: Vec<f64> = (0..network.num_links())
            .map(|_| normal.sample(&mut rng))
            .collect();
        network_r.push_attribute(&format!("irrelevant_{}", j + 1), column)?;
    }

    let entries = apply_count_noise(
        &truth.link_flows,
        config.dgp.noise_std_fraction,
        config.dgp.sensor_coverage,
        &mut rng,
    );
    let counts = ObservedCounts::new(entries, &network_r)?;

    let theta0: Vec<f64> = theta_true
        .iter()
        .map(|t| rng.gen_range(t - config.theta0_halfwidth..=t + config.theta0_halfwidth))
        .collect();

    let mut od_r = od.clone();
    if config.dgp.od_noise_fraction > 0.0 {
        od_r = perturb_od(
            &od_r,
            OdPerturbation::Noise(config.dgp.od_noise_fraction),
            rng.gen(),
        )?;
    }
    if config.dgp.od_scale_factor != 1.0 {
        // The scale level is the factor recovering the true matrix from the
        // reference, so the reference divides by it.
        od_r = perturb_od(
            &od_r,
            OdPerturbation::Scale(1.0 / config.dgp.od_scale_factor),
            0,
        )?;
    }

    let mut options = config.estimation.clone();
    options.theta0 = Coefficients::from_vector(&theta0, config.dgp.theta.psl_beta);
    if config.exogenous_times {
        options.exogenous_times = Some(truth.travel_times.clone());
        options.bilevel_iterations = 2;
    }

    let result = bilevel_optimization(&network_r, &od_r, paths.clone(), &counts, &options)?;
    let theta_hat = result.theta.to_vector();
    let k = theta_hat.len();
    let n = counts.len();
    let sigma2 = estimate_sigma2(&result.residuals, k)?;
    let mut names = vec!["travel_time".to_string()];
    names.extend(network_r.attribute_names().iter().cloned());
    let covariance = coefficient_covariance(&result.jacobian, sigma2, &names)?;
    let mut t_statistics = Vec::with_capacity(k);
    let mut rejected = Vec::with_capacity(k);
    for d in 0..k {
        let test = t_test(theta_hat[d], 0.0, covariance[(d, d)], n - k, config.alpha)?;
        t_statistics.push(test.statistic);
        rejected.push(test.reject);
    }
    let rss: f64 = result.residuals.iter().map(|r| r * r).sum();
    let nrmse = (rss / n as f64).sqrt() / counts.mean();
    Ok(ReplicateRecord {
        replicate,
        seed,
        theta_hat,
        t_statistics,
        rejected,
        objective: result.objective,
        nrmse,
        error: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_counts_match_expected_sizes() {
        let (network, od, paths) = builtin_network(BuiltinNetwork::Toy).unwrap();
        assert_eq!(network.num_nodes(), 4);
        assert_eq!(network.num_links(), 4);
        assert_eq!(od.len(), 3);
        assert_eq!(paths.total_paths(), 6);

        let (network, od, paths) = builtin_network(BuiltinNetwork::Wang).unwrap();
        assert_eq!(network.num_links(), 8);
        assert_eq!(od.len(), 12);
        assert_eq!(paths.total_paths(), 24);

        let (network, od, paths) = builtin_network(BuiltinNetwork::LoChan).unwrap();
        assert_eq!(network.num_links(), 14);
        assert_eq!(od.len(), 12);
        assert_eq!(paths.total_paths(), 44);

        let (network, od, paths) = builtin_network(BuiltinNetwork::Yang).unwrap();
        assert_eq!(network.num_nodes(), 9);
        assert_eq!(network.num_links(), 14);
        assert_eq!(od.len(), 9);
        assert_eq!(paths.total_paths(), 28);
    }

    #[test]
    fn siouxfalls_fixture_dimensions() {
        let (network, od, paths) = builtin_network(BuiltinNetwork::SiouxFalls).unwrap();
        assert_eq!(network.num_nodes(), 24);
        assert_eq!(network.num_links(), 76);
        assert_eq!(od.len(), 528);
        assert_eq!(paths.total_paths(), 1584);
        assert_eq!(network.attribute_names(), &["cost", "intersections"]);
    }

    #[test]
    fn unknown_network_name() {
        assert!(matches!(
            "fresno".parse::<BuiltinNetwork>(),
            Err(Error::UnknownNetwork(_))
        ));
    }

    #[test]
    fn noiseless_counts_equal_equilibrium_flows() {
        let (network, od, paths) = builtin_network(BuiltinNetwork::Toy).unwrap();
        let mut dgp = DgpConfig::new(Coefficients::new(-1.0, vec![]), 7);
        dgp.noise_std_fraction = 0.0;
        let (counts, truth) =
            generate_counts(&network, &od, &paths, &dgp, &SolverOptions::default()).unwrap();
        assert_eq!(counts.len(), network.num_links());
        for (a, c) in counts.entries() {
            assert_eq!(*c, truth.link_flows[*a]);
        }
    }

    #[test]
    fn count_noise_has_requested_spread() {
        let flows = vec![100.0; 4000];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noisy = apply_count_noise(&flows, 0.10, 1.0, &mut rng);
        let n = noisy.len() as f64;
        let mean_count: f64 = noisy.iter().map(|(_, c)| c).sum::<f64>() / n;
        let sd = (noisy
            .iter()
            .map(|(_, c)| (c - mean_count) * (c - mean_count))
            .sum::<f64>()
            / n)
            .sqrt();
        // Empirical NRMSE of the counts against truth is close to 10%.
        assert!((sd / 100.0 - 0.10).abs() < 0.01, "sd fraction {}", sd / 100.0);
    }

    #[test]
    fn coverage_masks_requested_share() {
        let flows = vec![50.0; 76];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noisy = apply_count_noise(&flows, 0.0, 0.5, &mut rng);
        assert_eq!(noisy.len(), 38);
        let mut seen = std::collections::HashSet::new();
        assert!(noisy.iter().all(|(a, _)| seen.insert(*a)));
    }

    #[test]
    fn od_perturbations() {
        let (_, od, _) = builtin_network(BuiltinNetwork::Yang).unwrap();
        let same = perturb_od(&od, OdPerturbation::Noise(0.0), 1).unwrap();
        assert_eq!(same.demand_vector(), od.demand_vector());
        let doubled = perturb_od(&od, OdPerturbation::Scale(2.0), 1).unwrap();
        assert_eq!(doubled.total_demand(), 2.0 * od.total_demand());
        let noisy = perturb_od(&od, OdPerturbation::Noise(0.2), 1).unwrap();
        assert!(noisy.demand_vector().iter().all(|&q| q >= 0.0));
        assert_ne!(noisy.demand_vector(), od.demand_vector());
    }

    #[test]
    fn distorted_yang_fixture_values() {
        let od = yang_distorted_od().unwrap();
        assert_eq!(
            od.demand_vector(),
            vec![100.0, 130.0, 120.0, 120.0, 170.0, 140.0, 110.0, 170.0, 105.0]
        );
    }
}
