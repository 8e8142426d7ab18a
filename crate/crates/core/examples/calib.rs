use netlogit::equilibrium::*;
use netlogit::estimation::*;
use netlogit::inference::*;
use netlogit::synthetic::*;

fn estimate(
    network: &netlogit::network::Network,
    od: &netlogit::network::OdDemand,
    paths: &netlogit::network::PathSet,
    counts: &ObservedCounts,
    stages: Vec<OuterStage>,
    theta0: Coefficients,
) -> EstimationResult {
    let mut options = EstimationOptions::new(theta0);
    options.stages = stages;
    bilevel_optimization(network, od, paths.clone(), counts, &options).unwrap()
}

fn ngd_lm() -> Vec<OuterStage> {
    vec![
        OuterStage { method: StageMethod::Ngd, iterations: 10 },
        OuterStage { method: StageMethod::Lm, iterations: 10 },
    ]
}
fn lm_ngd() -> Vec<OuterStage> {
    vec![
        OuterStage { method: StageMethod::Lm, iterations: 10 },
        OuterStage { method: StageMethod::Ngd, iterations: 10 },
    ]
}

fn main() {
    println!("== noiseless recovery, theta0=-14 ==");
    for which in BuiltinNetwork::SMALL {
        let (network, od, paths) = builtin_network(which).unwrap();
        let mut dgp = DgpConfig::new(Coefficients::new(-1.0, vec![]), 42);
        dgp.noise_std_fraction = 0.0;
        let (counts, _) = generate_counts(&network, &od, &paths, &dgp, &SolverOptions::tight()).unwrap();
        let r = estimate(&network, &od, &paths, &counts, ngd_lm(), Coefficients::new(-14.0, vec![]));
        let l0 = {
            let space = PathSpace::new(&network, &od, paths.clone()).unwrap();
            let st = solve_sue_logit(&network, &od, &space, &Coefficients::new(-14.0, vec![]), &SolverOptions::default()).unwrap();
            outer_objective(&st.link_flows, &counts)
        };
        println!("{:<8} theta {:+.5} obj {:.3e} ratio {:.2e}", which.name(), r.theta.theta_t, r.objective, r.objective / l0);
    }

    println!("== ordering + 1% t-tests (noisy) ==");
    for which in BuiltinNetwork::SMALL {
        let (network, od, paths) = builtin_network(which).unwrap();
        let dgp = DgpConfig::new(Coefficients::new(-1.0, vec![]), 42);
        let (counts, _) = generate_counts(&network, &od, &paths, &dgp, &SolverOptions::tight()).unwrap();
        let a = estimate(&network, &od, &paths, &counts, ngd_lm(), Coefficients::new(-14.0, vec![]));
        let b = estimate(&network, &od, &paths, &counts, lm_ngd(), Coefficients::new(-14.0, vec![]));
        let sigma2 = estimate_sigma2(&a.residuals, 1).unwrap();
        let cov = coefficient_covariance(&a.jacobian, sigma2, &["t".into()]).unwrap();
        let tt = t_test(a.theta.theta_t, 0.0, cov[(0,0)], counts.len()-1, 0.01).unwrap();
        println!("{:<8} ngd+lm {:+.4} ({:.3e}) | lm+ngd {:+.4} ({:.3e}) | order_ok {} | t {:+.2} reject1% {}",
            which.name(), a.theta.theta_t, a.objective, b.theta.theta_t, b.objective,
            a.objective <= b.objective, tt.statistic, tt.reject);
    }

    println!("== yang distorted OD, 5 links ==");
    let (network, od, paths) = builtin_network(BuiltinNetwork::Yang).unwrap();
    let dgp = DgpConfig::new(Coefficients::new(-1.0, vec![]), 42);
    let (all_counts, _) = generate_counts(&network, &od, &paths, &dgp, &SolverOptions::tight()).unwrap();
    let five: Vec<(usize, f64)> = all_counts.entries().iter()
        .filter(|(a, _)| yang_observed_links().contains(a)).cloned().collect();
    let counts = ObservedCounts::new(five, &network).unwrap();
    let distorted = yang_distorted_od().unwrap();
    let r = estimate(&network, &distorted, &paths, &counts, ngd_lm(), Coefficients::new(-14.0, vec![]));
    let sigma2 = estimate_sigma2(&r.residuals, 1).unwrap();
    let cov = coefficient_covariance(&r.jacobian, sigma2, &["t".into()]).unwrap();
    let tt = t_test(r.theta.theta_t, 0.0, cov[(0,0)], counts.len()-1, 0.05).unwrap();
    println!("theta {:+.4} obj {:.3e} t {:+.2} p {:.3e} reject5% {}", r.theta.theta_t, r.objective, tt.statistic, tt.p_value, tt.reject);

    println!("== sioux falls VOT (eta 0.5) ==");
    let (network, od, paths) = builtin_network(BuiltinNetwork::SiouxFalls).unwrap();
    let theta_true = Coefficients::new(-1.0, vec![-6.0, -3.0]);
    let mut dgp = DgpConfig::new(theta_true.clone(), 7);
    dgp.noise_std_fraction = 0.0;
    let (counts, truth) = generate_counts(&network, &od, &paths, &dgp, &SolverOptions::tight()).unwrap();
    println!("dgp fixed point iterations: {} converged {}", truth.iterations, truth.converged);
    for exo in [true, false] {
        let t0 = std::time::Instant::now();
        let mut options = EstimationOptions::new(Coefficients::new(0.0, vec![0.0, 0.0]));
        options.eta = 0.5;
        if exo {
            options.exogenous_times = Some(truth.travel_times.clone());
            options.bilevel_iterations = 2;
        } else {
            options.solver = SolverOptions::tight();
        }
        let r = bilevel_optimization(&network, &od, paths.clone(), &counts, &options).unwrap();
        let vot = r.theta.theta_t / r.theta.theta_z[0];
        println!("exo={} theta ({:+.4},{:+.4},{:+.4}) vot {:.5} err {:+.2}% obj {:.3e} [{:?}]",
            exo, r.theta.theta_t, r.theta.theta_z[0], r.theta.theta_z[1],
            vot, (vot - 1.0/6.0) / (1.0/6.0) * 100.0, r.objective, t0.elapsed());
    }
}
