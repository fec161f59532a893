use super::*;

#[test]
fn case_definitions() {
    let c1 = SimCase::new(1).unwrap();
    assert_eq!((c1.n, c1.p, c1.sigma), (50, 20, 0.75));
    assert_eq!(c1.blocks.len(), 4);
    assert!(c1.blocks.iter().all(|b| b.len() == 5));
    assert_eq!((c1.cov[[0, 0]], c1.cov[[0, 7]]), (1.0, 0.5));

    let c2 = SimCase::new(2).unwrap();
    assert_eq!((c2.n, c2.p), (50, 50));
    assert_eq!(c2.blocks.len(), 7);
    assert_eq!(c2.beta_star[5..8], [5.0; 3]);
    assert_eq!(c2.cov[[3, 4]], 0.0);

    let c3 = SimCase::new(3).unwrap();
    assert_eq!((c3.n, c3.p, c3.sigma), (30, 50, 5.0));
    assert_eq!(
        c3.beta_star[..20],
        repeat(&[(3.0, 5), (-1.5, 5), (1.0, 5), (2.0, 5)])[..]
    );
    assert!(c3.beta_star[20..].iter().all(|b| *b == 0.0));
    assert_eq!(c3.cov[[2, 5]], 0.125);

    assert!(SimCase::new(4).is_err());
}

#[test]
fn generators_are_pure_functions_of_the_seed() {
    let (a, _) = gen_case(1, 9).unwrap();
    let (b, _) = gen_case(1, 9).unwrap();
    let (c, _) = gen_case(1, 10).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.x.dim(), (50, 20));
    assert_eq!(gen_flsa_demo(3), gen_flsa_demo(3));
    assert_eq!(gen_image_demo(3), gen_image_demo(3));
}

#[test]
fn case_design_covariance() {
    // pooled over many draws, sample covariance of X approaches Sigma
    let case = SimCase::new(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut acc = Array2::<f64>::zeros((50, 50));
    let mut rows = 0.0;
    for _ in 0..200 {
        let d = case.draw(&mut rng).unwrap();
        acc = acc + d.x.t().dot(&d.x);
        rows += 30.0;
    }
    let emp = acc / rows;
    for (i, j) in [(0, 0), (0, 1), (3, 5), (10, 40)] {
        assert!(
            (emp[[i, j]] - case.cov[[i, j]]).abs() < 0.03,
            "({i},{j}) {}",
            emp[[i, j]]
        );
    }
}

#[test]
fn flsa_demo_layout() {
    let (y, truth) = gen_flsa_demo(1);
    assert_eq!(y.len(), 100);
    assert_eq!(runs_of(&truth).len(), 8);
    let (clean, truth) = gen_flsa_demo_with(1, 0.0);
    assert_eq!(clean, truth);
}

#[test]
fn image_demo_noise_level() {
    let (truth, clean) = gen_image_demo_with(1, 0.0);
    assert_eq!(truth, clean);
    assert_eq!(truth.dim(), (32, 32));
    assert!(truth.iter().all(|v| (0.0..=1.0).contains(v)));
    let mut sq = 0.0;
    let mut k = 0.0;
    for seed in 0..10 {
        let (t, noisy) = gen_image_demo(seed);
        sq += (&noisy - &t).mapv(|v| v * v).sum();
        k += 1024.0;
    }
    let sd = (sq / k).sqrt();
    assert!((sd - 0.35).abs() < 0.035, "{sd}");
}

#[test]
fn perfect_recovery_metrics() {
    let case = SimCase::new(1).unwrap();
    let m = metrics(&case.beta_star, &case).unwrap();
    assert_eq!((m.p_z, m.p_nz, m.p_b), (Some(1.0), Some(1.0), Some(1.0)));
    assert_eq!(m.mse, 0.0);
}

#[test]
fn constant_wrong_blocks_keep_block_accuracy() {
    let case = SimCase::new(1).unwrap();
    let est = repeat(&[(0.1, 5), (1.7, 5), (-0.2, 5), (2.4, 5)]);
    let m = metrics(&est, &case).unwrap();
    assert_eq!(m.p_b, Some(1.0));
    assert_eq!(m.p_z, Some(0.0));
    assert!(m.mse > 0.0);
    // MSE against an independent evaluation of the quadratic form
    let d = Array1::from_shape_fn(20, |j| est[j] - case.beta_star[j]);
    assert!((m.mse - d.dot(&case.cov.dot(&d))).abs() < 1e-12);
}

#[test]
fn all_distinct_estimates_have_zero_block_accuracy() {
    let case = SimCase::new(2).unwrap();
    let est: Vec<f64> = (0..50).map(|j| 0.01 * (j + 1) as f64).collect();
    let m = metrics(&est, &case).unwrap();
    assert_eq!(m.p_b, Some(0.0));
    assert_eq!(m.p_z, Some(0.0));
    assert_eq!(m.p_nz, Some(1.0));
}

#[test]
fn undefined_proportions_are_absent() {
    let mut case = SimCase::new(2).unwrap();
    case.beta_star = vec![1.0; 50];
    case.blocks = runs_of(&case.beta_star);
    let m = metrics(&vec![1.0; 50], &case).unwrap();
    assert_eq!(m.p_z, None);
    assert_eq!(m.p_nz, Some(1.0));
    let mut distinct = SimCase::new(2).unwrap();
    distinct.beta_star = (0..50).map(|j| j as f64).collect();
    distinct.blocks = runs_of(&distinct.beta_star);
    assert_eq!(
        metrics(&distinct.beta_star.clone(), &distinct).unwrap().p_b,
        None
    );
}

#[test]
fn pse_noise_floor_and_ordering() {
    let (data, case) = gen_case(1, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let reps = 1000;
    let mut at_truth = 0.0;
    let mut off = 0.0;
    let worse: Vec<f64> = case.beta_star.iter().map(|b| b + 0.3).collect();
    for _ in 0..reps {
        let mut r2 = rng.clone();
        at_truth += pse(
            &case.beta_star,
            &data.x,
            &case.beta_star,
            case.sigma,
            &mut rng,
        )
        .unwrap();
        off += pse(&worse, &data.x, &case.beta_star, case.sigma, &mut r2).unwrap();
    }
    let s2 = case.sigma * case.sigma;
    assert!((at_truth / reps as f64 - s2).abs() < 0.05 * s2);
    assert!(off > at_truth);
    assert_eq!(
        pse(&case.beta_star, &data.x, &case.beta_star, 0.0, &mut rng).unwrap(),
        0.0
    );
}

#[test]
fn mean_sd_edges() {
    assert_eq!(MeanSd::of(&[]), None);
    assert_eq!(
        MeanSd::of(&[2.0]),
        Some(MeanSd {
            mean: 2.0,
            sd: None
        })
    );
    let m = MeanSd::of(&[1.0, 3.0]).unwrap();
    assert_eq!(m.mean, 2.0);
    assert!((m.sd.unwrap() - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn small_simulation_is_deterministic() {
    let settings = SimSettings {
        replications: 2,
        pipeline: PipelineConfig {
            chain: crate::gibbs::ChainSettings::new(200, 100),
            ..PipelineConfig::default()
        },
        grid: GridSpec {
            lambda1_count: 2,
            lambda2: vec![1.0],
            gamma2: vec![0.2],
            ..GridSpec::default()
        },
    };
    let a = simulate(1, &[Model::Fused, Model::NegFused], &settings, 4).unwrap();
    let b = simulate(1, &[Model::Fused, Model::NegFused], &settings, 4).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 4);
    assert_eq!((a[0].replication, a[0].method), (0, Model::Fused));
    let s = summarize(&a);
    assert_eq!(s.len(), 2);
    assert_eq!(s[1].method, Model::NegFused);
    assert!(s[0].mse.sd.is_some());
    assert!(simulate(7, &[Model::Fused], &settings, 4).is_err());
}
