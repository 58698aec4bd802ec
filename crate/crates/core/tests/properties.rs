mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{max_diff_c, noisy_probabilities, random_noise, random_state, total_variation, true_support};
use spamtomo::decoder::{
    compute_all_z, decode_exact, estimate_z_identity, estimate_z_pi, estimate_z_pq, run_exact,
    run_randomized, shot_budget, Pivot, RandomizedConfig, Sampler, ZTable,
};
use spamtomo::eliminators::PlanCache;
use spamtomo::gauge::{decode_bsc, fix_block_independent, fix_probe, fix_purity, ProbeOptions};
use spamtomo::linalg::max_abs_diff;
use spamtomo::povm::random_povm;
use spamtomo::sim::{ideal_distribution, random_unitary};
use spamtomo::{
    computational_povm, enumerate_basis, gauge_transform, BasisFamily,
    Circuit, DensityMatrix, ExactOptions, NoiseMatrix, PauliString, RngStream, SimulatedDevice,
};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 32,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn gauge_orbit_is_observationally_equivalent(seed in any::<u64>(), n in 1usize..=3, alpha in 0.3f64..1.7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let povm = computational_povm(n).unwrap();
        let rho = random_state(n, 0.0, &mut rng);
        let a = NoiseMatrix::random(1 << n, rng.random_range(0.0..1.0), &mut rng).unwrap();
        let cand = gauge_transform(rho.matrix(), a.matrix(), alpha, &povm).unwrap();
        let u = random_unitary(n, &mut rng);
        let p = noisy_probabilities(rho.matrix(), a.matrix(), &u, &povm);
        let q = noisy_probabilities(&cand.rho, &cand.noise, &u, &povm);
        prop_assert!(total_variation(&p, &q) < 1e-10);
    }

    #[test]
    fn exact_decoding_round_trips(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let povm = computational_povm(n).unwrap();
        let rho = random_state(n, 0.1, &mut rng);
        let a = random_noise(1 << n, 0.1, &mut rng);
        let result = run_exact(&rho, &a, &povm, &ExactOptions::default()).unwrap();
        let s = rho.to_coefficients();
        prop_assert_eq!(&result.support, &true_support(&s));
        let sr = s.get(&result.reference);
        let cand = result.reconstruct(sr, &povm).unwrap();
        prop_assert!(max_diff_c(&cand.rho, rho.matrix()) < 1e-8);
        prop_assert!(max_abs_diff(&cand.noise, a.matrix()) < 1e-8);
    }

    #[test]
    fn ratios_do_not_depend_on_the_pivot(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let povm = computational_povm(2).unwrap();
        let rho = random_state(2, 0.1, &mut rng);
        let a = random_noise(4, 0.1, &mut rng);
        let dev = SimulatedDevice::new(rho, a, povm.clone()).unwrap();
        let z = compute_all_z(&dev, &PlanCache::computational(2)).unwrap();
        let base = decode_exact(&z, &povm, &ExactOptions::default()).unwrap();
        for i in 0..4 {
            for k in 0..4 {
                if z.deviation(&base.reference, i).unwrap()[k].abs() < 1e-3 {
                    continue;
                }
                let opts = ExactOptions { pivot: Some(Pivot { i, k }), ..ExactOptions::default() };
                let other = decode_exact(&z, &povm, &opts).unwrap();
                for (p, r) in &base.ratios {
                    prop_assert!((r - other.ratios[p]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn changing_the_reference_rescales_consistently(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let povm = computational_povm(2).unwrap();
        let rho = random_state(2, 0.1, &mut rng);
        let a = random_noise(4, 0.1, &mut rng);
        let base = run_exact(&rho, &a, &povm, &ExactOptions::default()).unwrap();
        let s = rho.to_coefficients();
        let other_ref = *base.support.iter().find(|p| s.get(p).abs() > 0.05 && **p != base.reference).unwrap_or(&base.reference);
        let opts = ExactOptions { reference: Some(other_ref), ..ExactOptions::default() };
        let other = run_exact(&rho, &a, &povm, &opts).unwrap();
        let scale = base.ratios[&other_ref];
        for (p, r) in &base.ratios {
            prop_assert!((r / scale - other.ratios[p]).abs() < 1e-8);
        }
        let g = gauge_transform(&rho.matrix().clone(), a.matrix(), s.get(&other_ref), &povm).unwrap();
        prop_assert!(max_abs_diff(&other.noise, &g.noise) < 1e-8);
    }

    #[test]
    fn purity_selects_the_physical_sign(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let povm = computational_povm(n).unwrap();
        let rho = DensityMatrix::random_pure(n, &mut rng).unwrap();
        let a = random_noise(1 << n, 0.1, &mut rng);
        let result = run_exact(&rho, &a, &povm, &ExactOptions::default()).unwrap();
        let sol = fix_purity(&result, 1.0, &povm).unwrap();
        prop_assert!((sol.alpha - rho.to_coefficients().get(&result.reference)).abs() < 1e-9);
    }

    #[test]
    fn block_and_probe_agree_on_product_noise(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let povm = computational_povm(2).unwrap();
        let rho = random_state(2, 0.1, &mut rng);
        let a = random_noise(2, 0.2, &mut rng).kron(&random_noise(2, 0.2, &mut rng));
        let result = run_exact(&rho, &a, &povm, &ExactOptions::default()).unwrap();
        let block = fix_block_independent(&result, (2, 2), &povm).unwrap();
        let probe = DensityMatrix::basis_state("00").unwrap();
        let y = ideal_distribution(&probe, &Circuit::identity(2), &povm).unwrap();
        let measured = a.apply(&y).unwrap();
        let probed = fix_probe(&result, &probe, &measured, &povm, &ProbeOptions::default()).unwrap();
        prop_assert!((block.alpha - probed.alpha).abs() < 1e-8);
    }

    #[test]
    fn symmetric_flips_contract_z_coefficients(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let flips: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.4)).collect();
        let a = NoiseMatrix::tensor_flip(&flips).unwrap();
        let rho = random_state(n, 0.1, &mut rng);
        let s = rho.to_coefficients();
        let povm = computational_povm(n).unwrap();
        let dev = SimulatedDevice::new(rho.clone(), a, povm.clone()).unwrap();
        let sol = decode_bsc(&dev, n, 1e-9).unwrap();
        let y = ideal_distribution(&rho, &Circuit::identity(n), &povm).unwrap();
        let noisy = sol.model.noise_matrix().unwrap().apply(&y).unwrap();
        for p in enumerate_basis(n, BasisFamily::ZStrings).iter().skip(1) {
            let c: f64 = noisy.iter().enumerate().map(|(l, v)| p.diagonal_sign(l).unwrap() * v).sum::<f64>()
                * (2f64).powf(-(n as f64) / 2.0);
            prop_assert!((c - sol.model.eigenvalue(&p.support()) * s.get(p)).abs() < 1e-9);
        }
    }

    #[test]
    fn general_povm_decodes_to_the_gauge_formula(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let povm = random_povm(n, 1 << n, &mut rng).unwrap();
        let rho = random_state(n, 0.1, &mut rng);
        let a = random_noise(1 << n, 0.1, &mut rng);
        let result = run_exact(&rho, &a, &povm, &ExactOptions::default()).unwrap();
        let s = rho.to_coefficients();
        let g = gauge_transform(rho.matrix(), a.matrix(), s.get(&result.reference), &povm).unwrap();
        prop_assert!(max_abs_diff(&result.noise, &g.noise) < 1e-7);
        for (p, r) in &result.ratios {
            prop_assert!((r - s.get(p) / s.get(&result.reference)).abs() < 1e-7);
        }
    }

    #[test]
    fn budgets_grow_as_parameters_tighten(c in 0.0f64..5.0, beta in 0.05f64..0.4, u in 0.1f64..0.9) {
        let base = shot_budget(2, beta, 0.1, 0.3, 0.1, u, c).unwrap();
        let more_c = shot_budget(2, beta, 0.1, 0.3, 0.1, u, c + 1.0).unwrap();
        let less_beta = shot_budget(2, beta / 2.0, 0.1, 0.3, 0.1, u, c).unwrap();
        let less_u = shot_budget(2, beta, 0.1, 0.3, 0.1, u / 2.0, c).unwrap();
        prop_assert!(more_c.support > base.support && more_c.noise > base.noise);
        prop_assert!(less_beta.support > base.support && less_beta.ratio > base.ratio);
        prop_assert!(less_u.support > base.support && less_u.pivot > base.pivot);
        prop_assert_eq!(less_beta.noise, base.noise);
    }
}

fn running_example_device() -> SimulatedDevice {
    SimulatedDevice::new(
        DensityMatrix::basis_state("01").unwrap(),
        NoiseMatrix::tensor_flip(&[0.1, 0.1]).unwrap(),
        computational_povm(2).unwrap(),
    )
    .unwrap()
}

#[test]
fn estimators_are_unbiased() {
    let dev = running_example_device();
    let sampler = Sampler::new(&dev, 2).unwrap();
    let exact = compute_all_z(&dev, &PlanCache::computational(2)).unwrap();
    let p = PauliString::from_label("ZI").unwrap();
    let zs: Vec<PauliString> = enumerate_basis(2, BasisFamily::ZStrings).into_iter().skip(1).collect();
    let (shots, reps) = (2000u64, 200u64);
    let mut mean_i = [0.0; 4];
    let mut mean_pi = [0.0; 4];
    for seed in 0..reps {
        let mut rng = RngStream::new(seed, 9);
        let zi = estimate_z_identity(&sampler, shots, &mut rng).unwrap();
        let zpq: Vec<Vec<f64>> = zs
            .iter()
            .map(|q| estimate_z_pq(&sampler, &p, q, shots, &mut rng).unwrap())
            .collect();
        let zpi = estimate_z_pi(&zi, &zpq, 2, 0).unwrap();
        for k in 0..4 {
            mean_i[k] += zi[k] / reps as f64;
            mean_pi[k] += zpi[k] / reps as f64;
        }
    }
    let target = exact.z_pi(&p, 0).unwrap();
    let se = 3.0 / ((shots * reps) as f64).sqrt();
    for k in 0..4 {
        assert!((mean_i[k] - exact.z_identity()[k]).abs() < 5.0 * se, "z^I[{k}]");
        assert!((mean_pi[k] - target[k]).abs() < 5.0 * se, "z^ZI,0[{k}]");
    }
}

#[test]
fn randomized_runs_are_deterministic_per_seed() {
    let dev = running_example_device();
    let cfg = RandomizedConfig::new(2, 0.25, 0.56, 0.1, 0.1, 42);
    let a = run_randomized(&dev, &cfg).unwrap();
    let b = run_randomized(&dev, &cfg).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = run_randomized(&dev, &RandomizedConfig { seed: 43, ..cfg }).unwrap();
    assert_ne!(a.noise, c.noise);
}

#[test]
fn support_scan_concentrates() {
    let inst = spamtomo::sweep::instance(spamtomo::sweep::Protocol::Beta, 0.06).unwrap();
    let s = inst.device.state().to_coefficients();
    let budget = shot_budget(2, inst.beta, 0.1, 1.0 / 3.0, 0.05, inst.u_norm, 1.0).unwrap();
    let sampler = Sampler::new(&inst.device, 2).unwrap();
    let all = enumerate_basis(2, BasisFamily::TracelessPauli);
    let mut large_found = 0;
    let mut only_true = 0;
    for seed in 0..100 {
        let batch = spamtomo::decoder::estimate_batch(&sampler, &all, budget.support, &RngStream::new(seed, 1)).unwrap();
        let found = spamtomo::decoder::support_threshold(&batch, inst.beta, inst.u_norm).unwrap_or_default();
        if all.iter().filter(|p| s.get(p).abs() >= 1.01 * inst.beta).all(|p| found.contains(p)) {
            large_found += 1;
        }
        if found.iter().all(|p| s.get(p).abs() > 0.0) {
            only_true += 1;
        }
    }
    assert!(large_found >= 95, "{large_found}/100 scans kept every |s_P| >= 1.01 beta");
    assert!(only_true >= 95, "{only_true}/100 scans excluded every zero coefficient");
}
