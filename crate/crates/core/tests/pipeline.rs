//! End-to-end checks across parsing, sampling, monitoring and testing.

use hysmc::bltl::{check, parse_bltl, TrajectoryTrace};
use hysmc::model::{guard_sat, parse_model, serialize_model};
use hysmc::models::{cardiac_model, Cell, Condition, Stimulus};
use hysmc::oracle::{
    chain_reachability, depth_three_fixture, exact_transition_probs, two_guard_fixture, Quadrature,
};
use hysmc::sampler::{trajectory_rng, Sampler, SamplerConfig};
use hysmc::smc::{run_smc, Decision, SmcConfig};

const THERMOSTAT: &str = "\
name thermostat
delta 0.5
horizon 60

[variables]
temp

[parameters]
rate = 0.4
target = 21

[init]
distribution = uniform
temp = (18, 19)

[modes]
initial = heating
mode heating
  label \"Heating\"
  ode temp = rate * (target + 4 - temp)
mode cooling
  label \"Cooling\"
  ode temp = -rate * (temp - target + 4)

[transitions]
heating -> cooling : 22 < temp
cooling -> heating : temp < 20
";

#[test]
fn thermostat_keeps_switching() {
    let h = parse_model(THERMOSTAT).unwrap();
    assert_eq!(parse_model(&serialize_model(&h)).unwrap(), h);
    let labels = h.labels();
    // bounds in steps of 0.5 time units
    let cycles = parse_bltl("F<=20([Cooling] & F<=20([Heating]))", &labels).unwrap();
    let v = run_smc(&h, &cycles, &SmcConfig::new(0.05, 0.05, 3), SamplerConfig::new(60, 0)).unwrap();
    assert_eq!(v.decision, Decision::H0);
    assert_eq!(v.samples, 59);

    // a switch overshoots 22 by at most 3 * (1 - e^-0.2) < 0.6
    let never_hot = parse_bltl("G<=40([temp < 23])", &labels).unwrap();
    let v = run_smc(&h, &never_hot, &SmcConfig::new(0.05, 0.05, 3), SamplerConfig::new(60, 0)).unwrap();
    assert_eq!(v.decision, Decision::H0);

    let stays_cool = parse_bltl("G<=40([temp < 21.5])", &labels).unwrap();
    let v = run_smc(&h, &stays_cool, &SmcConfig::new(0.05, 0.05, 3), SamplerConfig::new(60, 0)).unwrap();
    assert_eq!(v.decision, Decision::H1);
    let cex = v.counterexample.unwrap();
    assert!(!check(&stays_cool, &TrajectoryTrace { automaton: &h, trajectory: &cex }, 0).unwrap());

    // the witness is reproducible from its seed and index, robust mode included
    let mut cfg = SamplerConfig::new(60, cex.seed);
    cfg.robust = true;
    cfg.constants = stays_cool.constants(&h.variables).unwrap();
    let replay = Sampler::new(&h, cfg).unwrap().sample(cex.index).unwrap();
    assert_eq!(&replay.modes[..cex.len()], &cex.modes[..]);
    assert_eq!(&replay.states[..cex.states.len()], &cex.states[..]);
}

#[test]
fn cardiac_trajectories_are_deterministic_and_follow_guards() {
    let h = cardiac_model(Cell::Endo, Condition::Healthy, Stimulus::Transient);
    let mut cfg = SamplerConfig::new(300, 42);
    cfg.flow.substeps = 10;
    let s = Sampler::new(&h, cfg).unwrap();
    for i in 0..4 {
        let a = s.sample(i).unwrap();
        assert_eq!(a, s.sample(i).unwrap());
        assert!(a.modes.contains(&3), "no upstroke in trajectory {i}");
        for (k, rec) in a.steps.iter().enumerate() {
            match rec.transition {
                Some(t) => {
                    let tr = &h.transitions[t];
                    assert_eq!((tr.source, tr.target), (a.mode(k), a.mode(k + 1)));
                    let at = s
                        .system()
                        .flow(a.mode(k), rec.switch_time.unwrap(), a.state(k), k as f64 * h.delta, s.config().flow)
                        .unwrap();
                    assert!(guard_sat(&tr.guard, &at));
                }
                None => assert_eq!(a.mode(k), a.mode(k + 1)),
            }
        }
    }
}

#[test]
fn empirical_switching_within_three_sigma() {
    let trials = 4000;
    let cases = [((0.1, 0.5), (0.5, 0.9)), ((0.0, 0.25), (0.25, 1.0)), ((0.2, 0.3), (0.6, 0.9))];
    let mut inside = 0;
    let mut total = 0;
    for (g1, g2) in cases {
        let sys = two_guard_fixture(g1, g2);
        let exact = exact_transition_probs(&sys, 0, &[0.0]);
        let sampler = Sampler::new(&sys.to_automaton(1), SamplerConfig::new(1, 0)).unwrap();
        for rep in 0..10 {
            let mut rng = trajectory_rng(77, rep);
            let got = sampler.empirical_guard_probs(0, &[0.0], 0, &mut rng, trials).unwrap();
            for (p, q) in exact.probs.iter().zip(&got) {
                let sigma = (p * (1.0 - p) / trials as f64).sqrt();
                total += 1;
                if (p - q).abs() <= 3.0 * sigma + 1e-12 {
                    inside += 1;
                }
            }
        }
    }
    // 3 sigma covers about 99.7% per comparison
    assert!(inside as f64 >= 0.95 * total as f64, "{inside}/{total}");
}

#[test]
fn chain_distribution_sums_to_one() {
    let dist = chain_reachability(&depth_three_fixture(), 3, Quadrature::default());
    let sum: f64 = dist.values().sum();
    assert!((sum - 1.0).abs() < 1e-9, "{sum}");
    assert!(dist.keys().all(|p| p.len() == 4 && p[0] == 0));
}
