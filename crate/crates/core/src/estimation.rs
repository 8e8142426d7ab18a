//! Outer-level nonlinear least squares: the squared gap between predicted and
//! observed link counts, its analytic derivatives through the logit loading,
//! normalized-gradient and Levenberg-Marquardt updates, and the alternating
//! bilevel loop that couples them with the equilibrium computation.

use crate::equilibrium::{
    column_generation_step, path_selection_step, solve_sue_logit, stochastic_network_loading,
    Coefficients, EquilibriumState, PathSpace, SolverOptions,
};
use crate::error::{Error, Result};
use crate::network::{Network, OdDemand, PathSet};
use nalgebra::{DMatrix, DVector};

/// Observed traffic counts on a subset of links. Counts may be negative
/// (measurement noise is kept as drawn).
#[derive(Debug, Clone)]
pub struct ObservedCounts {
    entries: Vec<(usize, f64)>,
}

impl ObservedCounts {
    pub fn new(entries: Vec<(usize, f64)>, network: &Network) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Structure("need at least one observed count".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for &(a, c) in &entries {
            if a >= network.num_links() {
                return Err(Error::Structure(format!("unknown link index {a}")));
            }
            if !c.is_finite() {
                return Err(Error::Domain(format!("non-finite count on link {a}")));
            }
            if !seen.insert(a) {
                return Err(Error::Structure(format!("duplicate count for link {a}")));
            }
        }
        Ok(ObservedCounts { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn link_indices(&self) -> Vec<usize> {
        self.entries.iter().map(|&(a, _)| a).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|&(_, c)| c).collect()
    }

    /// Restricts a dense link vector to the observed links, in count order.
    pub fn restrict(&self, link_values: &[f64]) -> Vec<f64> {
        self.entries.iter().map(|&(a, _)| link_values[a]).collect()
    }

    pub fn mean(&self) -> f64 {
        self.values().iter().sum::<f64>() / self.len() as f64
    }
}

/// Squared count gap `sum_a (x_a - xbar_a)^2` over observed links.
pub fn outer_objective(link_flows: &[f64], counts: &ObservedCounts) -> f64 {
    counts
        .entries()
        .iter()
        .map(|&(a, c)| {
            let d = link_flows[a] - c;
            d * d
        })
        .sum()
}

/// Closed-form coefficient estimate for a two-parallel-route choice from a
/// single link count: `ln(q / xbar - 1)` for demand `q` and count `xbar`.
pub fn closed_form_two_route_estimate(count: f64, demand: f64) -> Result<f64> {
    if !(count > 0.0 && count < demand) {
        return Err(Error::Domain(format!(
            "count {count} must lie strictly between 0 and the demand {demand}"
        )));
    }
    Ok((demand / count - 1.0).ln())
}

/// Derivative of the path probabilities with respect to one coefficient.
///
/// `zd_path` holds the per-path totals of the coefficient's attribute. Within
/// each OD, `dp_h = p_h (z_h - sum_j p_j z_j)`; the per-OD sums are zero
/// because the probabilities conserve mass.
pub fn probability_jacobian_column(
    p: &[f64],
    space: &PathSpace,
    zd_path: &[f64],
) -> Result<Vec<f64>> {
    if p.len() != space.num_paths() || zd_path.len() != space.num_paths() {
        return Err(Error::Structure(format!(
            "probability/attribute vectors of length {}/{} for {} paths",
            p.len(),
            zd_path.len(),
            space.num_paths()
        )));
    }
    let inc = space.incidence();
    let mut dp = vec![0.0; p.len()];
    for w in 0..inc.num_ods() {
        let range = inc.od_range(w);
        let mean: f64 = range.clone().map(|h| p[h] * zd_path[h]).sum();
        for h in range {
            dp[h] = p[h] * (zd_path[h] - mean);
        }
    }
    Ok(dp)
}

/// Second derivative of the path probabilities with respect to one
/// coefficient, from the first-derivative vector.
fn probability_second_derivative_column(
    p: &[f64],
    dp: &[f64],
    space: &PathSpace,
    zd_path: &[f64],
) -> Vec<f64> {
    let inc = space.incidence();
    let mut d2p = vec![0.0; p.len()];
    for w in 0..inc.num_ods() {
        let range = inc.od_range(w);
        let mean: f64 = range.clone().map(|h| p[h] * zd_path[h]).sum();
        let spread: f64 = range.clone().map(|h| dp[h] * zd_path[h]).sum();
        for h in range {
            d2p[h] = dp[h] * (zd_path[h] - mean) - p[h] * spread;
        }
    }
    d2p
}

/// Per-path totals of the attribute weighted by coefficient `d` (index 0 is
/// travel time, the rest follow the exogenous attribute columns).
pub fn coefficient_path_attribute(space: &PathSpace, times: &[f64], d: usize) -> Vec<f64> {
    if d == 0 {
        space.path_times(times)
    } else {
        space.path_attribute(d - 1).to_vec()
    }
}

/// Jacobian of the observed link flows with respect to all coefficients
/// (rows follow the count ordering, columns the coefficient packing).
pub fn flow_jacobian(
    space: &PathSpace,
    q: &[f64],
    p: &[f64],
    times: &[f64],
    counts: &ObservedCounts,
    dim: usize,
) -> Result<DMatrix<f64>> {
    let demands = space.incidence().path_demands(q);
    let mut jac = DMatrix::zeros(counts.len(), dim);
    for d in 0..dim {
        let zd = coefficient_path_attribute(space, times, d);
        let dp = probability_jacobian_column(p, space, &zd)?;
        let df: Vec<f64> = dp.iter().zip(&demands).map(|(dp, q)| dp * q).collect();
        let dx = space.incidence().link_flows(&df);
        for (i, &(a, _)) in counts.entries().iter().enumerate() {
            jac[(i, d)] = dx[a];
        }
    }
    Ok(jac)
}

/// Gradient of the outer objective: `2 J^T (x - xbar)`.
pub fn outer_gradient(
    jacobian: &DMatrix<f64>,
    link_flows: &[f64],
    counts: &ObservedCounts,
) -> Vec<f64> {
    let residual: Vec<f64> = counts
        .entries()
        .iter()
        .map(|&(a, c)| link_flows[a] - c)
        .collect();
    let r = DVector::from_vec(residual);
    let g = 2.0 * jacobian.transpose() * r;
    g.iter().cloned().collect()
}

/// Diagonal second derivatives of the outer objective,
/// `2 [(d2x/dtheta_d^2)^T (x - xbar) + ||dx/dtheta_d||^2]` per coefficient.
pub fn second_derivative_diag(
    space: &PathSpace,
    q: &[f64],
    p: &[f64],
    times: &[f64],
    link_flows: &[f64],
    counts: &ObservedCounts,
    dim: usize,
) -> Result<Vec<f64>> {
    let demands = space.incidence().path_demands(q);
    let residual: Vec<f64> = counts
        .entries()
        .iter()
        .map(|&(a, c)| link_flows[a] - c)
        .collect();
    let mut out = Vec::with_capacity(dim);
    for d in 0..dim {
        let zd = coefficient_path_attribute(space, times, d);
        let dp = probability_jacobian_column(p, space, &zd)?;
        let d2p = probability_second_derivative_column(p, &dp, space, &zd);
        let df: Vec<f64> = dp.iter().zip(&demands).map(|(v, q)| v * q).collect();
        let d2f: Vec<f64> = d2p.iter().zip(&demands).map(|(v, q)| v * q).collect();
        let dx = space.incidence().link_flows(&df);
        let d2x = space.incidence().link_flows(&d2f);
        let mut curvature = 0.0;
        for (i, &(a, _)) in counts.entries().iter().enumerate() {
            curvature += d2x[a] * residual[i] + dx[a] * dx[a];
        }
        out.push(2.0 * curvature);
    }
    Ok(out)
}

/// Normalized gradient descent update `theta - eta * g / ||g||`. A zero
/// gradient returns the point unchanged with the stationary flag set.
pub fn ngd_step(theta: &[f64], gradient: &[f64], eta: f64) -> (Vec<f64>, bool) {
    let norm = gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm == 0.0 {
        return (theta.to_vec(), true);
    }
    (
        theta
            .iter()
            .zip(gradient)
            .map(|(t, g)| t - eta * g / norm)
            .collect(),
        false,
    )
}

/// Levenberg-Marquardt update `theta + (J^T J + delta I)^{-1} J^T r` with
/// residual `r = xbar - x`. With `delta = 0` this is the Gauss-Newton step;
/// a singular system then falls back to the SVD pseudo-inverse and reports it.
pub fn lm_step(
    theta: &[f64],
    jacobian: &DMatrix<f64>,
    residual: &[f64],
    delta: f64,
) -> Result<(Vec<f64>, bool)> {
    if delta < 0.0 {
        return Err(Error::Domain("LM damping must be nonnegative".into()));
    }
    let d = jacobian.ncols();
    let r = DVector::from_vec(residual.to_vec());
    let jtj = jacobian.transpose() * jacobian + DMatrix::identity(d, d) * delta;
    let jtr = jacobian.transpose() * r;
    let (step, pseudo) = match jtj.clone().cholesky() {
        Some(chol) => (chol.solve(&jtr), false),
        None => {
            let svd = jtj.svd(true, true);
            let step = svd
                .solve(&jtr, 1e-12)
                .map_err(|e| Error::Domain(format!("pseudo-inverse failed: {e}")))?;
            (step, true)
        }
    };
    Ok((
        theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect(),
        pseudo,
    ))
}

/// Expected sign of a coefficient; violations are projected to zero during
/// the iterations when a constraint is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConstraint {
    #[default]
    Free,
    NonPositive,
    NonNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageMethod {
    Ngd,
    Lm,
}

/// One stage of the outer-level optimization.
#[derive(Debug, Clone, Copy)]
pub struct OuterStage {
    pub method: StageMethod,
    pub iterations: usize,
}

/// Column-generation schedule for the inner level: fresh utility-shortest
/// paths for a demand-ranked share of OD pairs each bilevel iteration, with
/// pruning back to `k_s` paths after the equilibrium solve.
#[derive(Debug, Clone, Copy)]
pub struct ColumnGenConfig {
    /// Total share of OD pairs (by demand rank) eligible for generation.
    pub coverage: f64,
    /// Share of OD pairs treated per bilevel iteration.
    pub per_iteration: f64,
    /// Paths generated per treated OD pair.
    pub k_g: usize,
    /// Consideration-set size kept after selection.
    pub k_s: usize,
}

impl Default for ColumnGenConfig {
    fn default() -> Self {
        ColumnGenConfig {
            coverage: 0.30,
            per_iteration: 0.03,
            k_g: 40,
            k_s: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EstimationOptions {
    /// Outer stages in order; defaults to NGD then LM, 10 iterations each.
    pub stages: Vec<OuterStage>,
    /// NGD learning rate (exact step norm).
    pub eta: f64,
    /// Constant LM damping.
    pub lm_damping: f64,
    /// Bilevel alternations; the final one only solves the inner level.
    pub bilevel_iterations: usize,
    pub theta0: Coefficients,
    /// Per-coefficient expected signs; empty means unconstrained.
    pub sign_constraints: Vec<SignConstraint>,
    /// Fixed link travel times: the inner level reduces to a single loading.
    pub exogenous_times: Option<Vec<f64>>,
    pub column_generation: Option<ColumnGenConfig>,
    pub solver: SolverOptions,
}

impl EstimationOptions {
    pub fn new(theta0: Coefficients) -> Self {
        EstimationOptions {
            stages: vec![
                OuterStage { method: StageMethod::Ngd, iterations: 10 },
                OuterStage { method: StageMethod::Lm, iterations: 10 },
            ],
            eta: 2.0,
            lm_damping: 1.0,
            bilevel_iterations: 10,
            theta0,
            sign_constraints: Vec::new(),
            exogenous_times: None,
            column_generation: None,
            solver: SolverOptions::default(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.eta <= 0.0 {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.lm_damping < 0.0 {
            return Err(Error::Config("LM damping must be nonnegative".into()));
        }
        if !self.sign_constraints.is_empty() && self.sign_constraints.len() != dim {
            return Err(Error::Config(format!(
                "{} sign constraints for {} coefficients",
                self.sign_constraints.len(),
                dim
            )));
        }
        Ok(())
    }
}

/// One recorded iterate of the optimization.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub bilevel_iteration: usize,
    pub stage: &'static str,
    pub theta: Vec<f64>,
    pub objective: f64,
    pub paths_added: usize,
    pub paths_removed: usize,
}

/// Full iterate history; the reported estimate attains the minimum recorded
/// objective.
#[derive(Debug, Clone, Default)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
}

impl ConvergenceTrace {
    pub fn best(&self) -> Option<&TraceRecord> {
        self.records
            .iter()
            .min_by(|a, b| a.objective.total_cmp(&b.objective))
    }
}

#[derive(Debug, Clone)]
pub struct EstimationResult {
    pub theta: Coefficients,
    pub objective: f64,
    pub equilibrium: EquilibriumState,
    /// Jacobian of observed flows at the returned estimate.
    pub jacobian: DMatrix<f64>,
    /// Residuals `xbar - x(theta)` in count order.
    pub residuals: Vec<f64>,
    pub trace: ConvergenceTrace,
    pub warnings: Vec<String>,
    pub inner_converged: bool,
    pub coefficient_names: Vec<String>,
}

/// Coefficients whose path attribute is constant within every OD; their
/// probability derivative is identically zero and they cannot be estimated.
pub fn non_identifiable_coefficients(
    space: &PathSpace,
    times: &[f64],
    dim: usize,
) -> Vec<usize> {
    let mut frozen = Vec::new();
    for d in 0..dim {
        let zd = coefficient_path_attribute(space, times, d);
        let inc = space.incidence();
        let mut varies = false;
        for w in 0..inc.num_ods() {
            let range = inc.od_range(w);
            let first = zd[range.start];
            let scale = 1.0 + first.abs();
            if range.clone().any(|h| (zd[h] - first).abs() > 1e-10 * scale) {
                varies = true;
                break;
            }
        }
        if !varies {
            frozen.push(d);
        }
    }
    frozen
}

fn apply_sign_projection(theta: &mut [f64], constraints: &[SignConstraint]) {
    if constraints.is_empty() {
        return;
    }
    for (t, c) in theta.iter_mut().zip(constraints) {
        match c {
            SignConstraint::Free => {}
            SignConstraint::NonPositive if *t > 0.0 => *t = 0.0,
            SignConstraint::NonNegative if *t < 0.0 => *t = 0.0,
            _ => {}
        }
    }
}

fn mask_frozen(values: &mut [f64], frozen: &[usize]) {
    for &d in frozen {
        values[d] = 0.0;
    }
}

/// Runs the staged outer-level optimization against frozen travel times and
/// path space. Returns the best iterate's coefficient vector and a record of
/// every iterate.
#[allow(clippy::too_many_arguments)]
pub fn outer_level_optimization(
    network: &Network,
    space: &PathSpace,
    q: &[f64],
    times: &[f64],
    counts: &ObservedCounts,
    theta0: &Coefficients,
    options: &EstimationOptions,
    bilevel_iteration: usize,
    trace: &mut ConvergenceTrace,
    warnings: &mut Vec<String>,
) -> Result<Vec<f64>> {
    let dim = theta0.dim();
    let frozen = non_identifiable_coefficients(space, times, dim);
    for &d in &frozen {
        let name = if d == 0 {
            "travel_time".to_string()
        } else {
            network.attribute_names()[d - 1].clone()
        };
        let msg = format!(
            "coefficient `{name}` is not identifiable (attribute constant within every OD); frozen"
        );
        if !warnings.contains(&msg) {
            warnings.push(msg);
        }
    }

    let mut theta = theta0.to_vector();
    let mut best = (f64::INFINITY, theta.clone());
    let evaluate = |theta: &[f64],
                        stage: &'static str,
                        best: &mut (f64, Vec<f64>),
                        trace: &mut ConvergenceTrace|
     -> Result<(Vec<f64>, Vec<f64>)> {
        let coeffs = Coefficients::from_vector(theta, theta0.psl_beta);
        let loading = stochastic_network_loading(&coeffs, space, q, times, network)?;
        let objective = outer_objective(&loading.link_flows, counts);
        trace.records.push(TraceRecord {
            bilevel_iteration,
            stage,
            theta: theta.to_vec(),
            objective,
            paths_added: 0,
            paths_removed: 0,
        });
        if objective < best.0 {
            *best = (objective, theta.to_vec());
        }
        Ok((loading.link_flows, loading.probabilities))
    };

    for stage in &options.stages {
        for _ in 0..stage.iterations {
            let stage_name = match stage.method {
                StageMethod::Ngd => "ngd",
                StageMethod::Lm => "lm",
            };
            let (x, p) = evaluate(&theta, stage_name, &mut best, trace)?;
            match stage.method {
                StageMethod::Ngd => {
                    let jac = flow_jacobian(space, q, &p, times, counts, dim)?;
                    let mut g = outer_gradient(&jac, &x, counts);
                    mask_frozen(&mut g, &frozen);
                    let (next, stationary) = ngd_step(&theta, &g, options.eta);
                    if stationary {
                        break;
                    }
                    theta = next;
                }
                StageMethod::Lm => {
                    let mut jac = flow_jacobian(space, q, &p, times, counts, dim)?;
                    for &d in &frozen {
                        for i in 0..jac.nrows() {
                            jac[(i, d)] = 0.0;
                        }
                    }
                    let residual: Vec<f64> = counts
                        .entries()
                        .iter()
                        .map(|&(a, c)| c - x[a])
                        .collect();
                    // Frozen columns are zero; damping keeps the system regular.
                    let damping = if options.lm_damping == 0.0 && !frozen.is_empty() {
                        1e-8
                    } else {
                        options.lm_damping
                    };
                    let (mut next, pseudo) = lm_step(&theta, &jac, &residual, damping)?;
                    if pseudo {
                        let msg = "LM normal equations singular; pseudo-inverse used".to_string();
                        if !warnings.contains(&msg) {
                            warnings.push(msg);
                        }
                    }
                    mask_frozen(&mut next[..], &frozen);
                    for &d in &frozen {
                        next[d] = theta[d];
                    }
                    theta = next;
                }
            }
            apply_sign_projection(&mut theta, &options.sign_constraints);
        }
    }
    // Score the post-update iterate as well, so the argmin covers every point.
    evaluate(&theta, "outer-final", &mut best, trace)?;
    Ok(best.1)
}

/// Demand-ranked OD slice treated by column generation at a given bilevel
/// iteration.
fn column_generation_subset(
    od: &OdDemand,
    config: &ColumnGenConfig,
    bilevel_iteration: usize,
) -> Vec<usize> {
    let n = od.len();
    let target = ((config.coverage * n as f64).round() as usize).min(n);
    let per = (((config.per_iteration * n as f64).round() as usize).max(1)).min(target.max(1));
    if target == 0 {
        return Vec::new();
    }
    let mut ranked: Vec<usize> = (0..n).collect();
    ranked.sort_by(|&a, &b| {
        od.pairs()[b]
            .demand
            .total_cmp(&od.pairs()[a].demand)
            .then(a.cmp(&b))
    });
    let slices = target.div_ceil(per);
    let slice = (bilevel_iteration - 1) % slices;
    let start = slice * per;
    let end = (start + per).min(target);
    ranked[start..end].to_vec()
}

/// Alternating bilevel optimization: inner equilibrium (with optional column
/// generation and path selection), then the staged outer update, except on
/// the final iteration so the returned flows satisfy the equilibrium at the
/// returned coefficients.
pub fn bilevel_optimization(
    network: &Network,
    od: &OdDemand,
    initial_paths: PathSet,
    counts: &ObservedCounts,
    options: &EstimationOptions,
) -> Result<EstimationResult> {
    let dim = options.theta0.dim();
    options.validate(dim)?;
    if options.theta0.theta_z.len() != network.num_attributes() {
        return Err(Error::Structure(format!(
            "{} exogenous weights for {} attribute columns",
            options.theta0.theta_z.len(),
            network.num_attributes()
        )));
    }
    if options.bilevel_iterations == 0 {
        return Err(Error::Config("need at least one bilevel iteration".into()));
    }
    if let Some(times) = &options.exogenous_times {
        if times.len() != network.num_links() {
            return Err(Error::Structure(
                "fixed travel-time vector does not match the link count".into(),
            ));
        }
    }

    let q = od.demand_vector();
    let mut paths = initial_paths;
    let mut space = PathSpace::new(network, od, paths.clone())?;
    let mut theta = options.theta0.to_vector();
    let mut trace = ConvergenceTrace::default();
    let mut warnings = Vec::new();
    let mut current_times = options
        .exogenous_times
        .clone()
        .unwrap_or_else(|| network.free_flow_times());

    struct Best {
        objective: f64,
        theta: Vec<f64>,
        state: EquilibriumState,
        jacobian: DMatrix<f64>,
        residuals: Vec<f64>,
    }
    let mut best: Option<Best> = None;
    let mut inner_converged = true;

    for i in 1..=options.bilevel_iterations {
        let coeffs = Coefficients::from_vector(&theta, options.theta0.psl_beta);

        let mut paths_added = 0;
        let mut cg_subset = Vec::new();
        if let Some(cg) = &options.column_generation {
            cg_subset = column_generation_subset(od, cg, i);
            paths_added = column_generation_step(
                network,
                od,
                &mut paths,
                &coeffs,
                &current_times,
                &cg_subset,
                cg.k_g,
            )?;
            if paths_added > 0 {
                space = PathSpace::new(network, od, paths.clone())?;
            }
        }

        let state = match &options.exogenous_times {
            Some(times) => {
                let loading = stochastic_network_loading(&coeffs, &space, &q, times, network)?;
                EquilibriumState {
                    link_flows: loading.link_flows,
                    path_flows: loading.path_flows,
                    probabilities: loading.probabilities,
                    travel_times: times.clone(),
                    objective_trace: Vec::new(),
                    converged: true,
                    iterations: 1,
                }
            }
            None => {
                let state = solve_sue_logit(network, od, &space, &coeffs, &options.solver)?;
                if !state.converged {
                    inner_converged = false;
                }
                state
            }
        };
        current_times = state.travel_times.clone();

        let mut paths_removed = 0;
        if let Some(cg) = &options.column_generation {
            paths_removed = path_selection_step(
                network,
                &mut paths,
                &coeffs,
                &current_times,
                cg.k_s,
                Some(&cg_subset),
            )?;
        }

        let objective = outer_objective(&state.link_flows, counts);
        trace.records.push(TraceRecord {
            bilevel_iteration: i,
            stage: "inner",
            theta: theta.clone(),
            objective,
            paths_added,
            paths_removed,
        });

        if best.as_ref().map_or(true, |b| objective < b.objective) {
            let jacobian = flow_jacobian(
                &space,
                &q,
                &state.probabilities,
                &state.travel_times,
                counts,
                dim,
            )?;
            let residuals = counts
                .entries()
                .iter()
                .map(|&(a, c)| c - state.link_flows[a])
                .collect();
            best = Some(Best {
                objective,
                theta: theta.clone(),
                state: state.clone(),
                jacobian,
                residuals,
            });
        }

        if i < options.bilevel_iterations {
            let theta_struct = Coefficients::from_vector(&theta, options.theta0.psl_beta);
            theta = outer_level_optimization(
                network,
                &space,
                &q,
                &current_times,
                counts,
                &theta_struct,
                options,
                i,
                &mut trace,
                &mut warnings,
            )?;
        }

        // Apply the selection pruning to the working space for the next
        // iteration (the recorded state refers to the pre-selection set).
        if paths_removed > 0 {
            space = PathSpace::new(network, od, paths.clone())?;
        }
    }

    let best = best.expect("at least one bilevel iteration ran");
    let mut names = vec!["travel_time".to_string()];
    names.extend(network.attribute_names().iter().cloned());
    Ok(EstimationResult {
        theta: Coefficients::from_vector(&best.theta, options.theta0.psl_beta),
        objective: best.objective,
        equilibrium: best.state,
        jacobian: best.jacobian,
        residuals: best.residuals,
        trace,
        warnings,
        inner_converged,
        coefficient_names: names,
    })
}
