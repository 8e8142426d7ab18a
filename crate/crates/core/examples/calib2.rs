use netlogit::equilibrium::*;
use netlogit::estimation::*;
use netlogit::synthetic::*;

fn main() {
    // Criterion 9: path-flow uniqueness across random initializations.
    for which in BuiltinNetwork::ALL {
        let (network, od, paths) = builtin_network(which).unwrap();
        let space = PathSpace::new(&network, &od, paths.clone()).unwrap();
        let coeffs = if which == BuiltinNetwork::SiouxFalls {
            Coefficients::new(-1.0, vec![-6.0, -3.0])
        } else {
            Coefficients::new(-1.0, vec![])
        };
        let mut states = Vec::new();
        for init in [InitialLoading::FreeFlow, InitialLoading::Random(11), InitialLoading::Random(77), InitialLoading::Uniform] {
            let mut opts = SolverOptions::tight();
            opts.initial = init;
            let st = solve_sue_logit(&network, &od, &space, &coeffs, &opts).unwrap();
            states.push(st);
        }
        let scale = states[0].path_flows.iter().cloned().fold(1.0, f64::max);
        let mut max_gap: f64 = 0.0;
        for s in &states[1..] {
            for (a, b) in states[0].path_flows.iter().zip(&s.path_flows) {
                max_gap = max_gap.max((a - b).abs() / scale);
            }
        }
        println!("{:<10} uniqueness max rel gap {:.2e} (converged: {})",
            which.name(), max_gap, states.iter().all(|s| s.converged));
    }

    // Criterion 10: scan sign structure over theta_t in [-15, 15].
    for which in BuiltinNetwork::SMALL {
        let (network, od, paths) = builtin_network(which).unwrap();
        let dgp = DgpConfig::new(Coefficients::new(-1.0, vec![]), 42);
        let (counts, truth) = generate_counts(&network, &od, &paths, &dgp, &SolverOptions::tight()).unwrap();
        let space = PathSpace::new(&network, &od, paths.clone()).unwrap();
        let q = od.demand_vector();
        let times = &truth.travel_times;
        let mut signs = Vec::new();
        let mut theta = -15.0;
        while theta <= 15.0 + 1e-9 {
            let coeffs = Coefficients::new(theta, vec![]);
            let loading = stochastic_network_loading(&coeffs, &space, &q, times, &network).unwrap();
            let jac = flow_jacobian(&space, &q, &loading.probabilities, times, &counts, 1).unwrap();
            let g = outer_gradient(&jac, &loading.link_flows, &counts)[0];
            if g != 0.0 { signs.push(g.signum() as i32); }
            theta += 0.1;
        }
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        let neg_to_pos = !signs.is_empty() && signs[0] == -1 && *signs.last().unwrap() == 1;
        println!("{:<10} scan: {} sign changes, starts neg ends pos: {}", which.name(), changes, neg_to_pos);
    }
}
