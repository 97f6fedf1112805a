mod common;

use common::median;
use corrmv::datagen::{
    corrupt_instances, corrupt_pixels, gen_cluster_retrieval_views, gen_labeled_multiview,
    gen_point_set_views, ClusterRetrievalConfig, LabeledMultiViewConfig, NoiseKind, NoiseSpec,
    PointSetConfig, SaltPepper,
};
use corrmv::eval::{knn_classify_features, retrieval_topk, LabeledSplit};
use corrmv::features::MultiViewFeatureSet;

fn labeled(seed: u64) -> MultiViewFeatureSet {
    gen_labeled_multiview(&LabeledMultiViewConfig::new(4, 30, vec![8, 5], 3, seed))
        .unwrap()
        .features
}

#[test]
fn instance_noise_matches_clean_moments_on_average() {
    let mut ratios = Vec::new();
    for seed in 0..50 {
        let fs = labeled(seed);
        let clean = fs.view(0).clone();
        let spec = NoiseSpec::fraction(NoiseKind::InstanceReplacement, 1.0, seed);
        let (noisy, report) = corrupt_instances(&fs, 0, &spec).unwrap();
        assert_eq!(report.affected.len(), 120);
        let z = noisy.view(0);
        assert!(z.iter().all(|&x| x == clean.min() || x == clean.max()));
        ratios.push((z.mean() - clean.min()) / (clean.mean() - clean.min()));
        assert_eq!(noisy.view(1), fs.view(1));
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((mean - 1.0).abs() < 0.02, "{mean}");
}

#[test]
fn salt_pepper_levels_are_the_extremes() {
    let fs = labeled(3);
    let sp = SaltPepper::matching(fs.view(0));
    assert_eq!(sp.pepper, fs.view(0).min());
    assert_eq!(sp.salt, fs.view(0).max());
    let expected = sp.pepper + sp.p_salt * (sp.salt - sp.pepper);
    assert!((expected - fs.view(0).mean()).abs() < 1e-12);
}

#[test]
fn pixel_noise_touches_the_requested_share_of_rows() {
    let fs = labeled(5);
    let spec = NoiseSpec::fraction(NoiseKind::PixelReplacement, 0.5, 9);
    let (noisy, report) = corrupt_pixels(&fs, 0, &spec).unwrap();
    assert_eq!(report.rows.len(), 120);
    for (i, rows) in report.rows.iter().enumerate() {
        assert_eq!(rows.len(), 4);
        for r in 0..8 {
            if !rows.contains(&r) {
                assert_eq!(noisy.view(0)[(r, i)], fs.view(0)[(r, i)]);
            }
        }
    }
}

#[test]
fn corruption_is_reproducible_and_seed_sensitive() {
    let fs = labeled(1);
    let spec = NoiseSpec::fraction(NoiseKind::InstanceReplacement, 0.25, 4);
    let (a, ra) = corrupt_instances(&fs, 0, &spec).unwrap();
    let (b, rb) = corrupt_instances(&fs, 0, &spec).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra, rb);
    let other = NoiseSpec { seed: 5, ..spec };
    assert_ne!(corrupt_instances(&fs, 0, &other).unwrap().1, ra);
}

#[test]
fn empty_selection_warns() {
    let fs = labeled(1);
    let spec = NoiseSpec::fraction(NoiseKind::InstanceReplacement, 0.0, 4);
    let (out, report) = corrupt_instances(&fs, 0, &spec).unwrap();
    assert_eq!(out, fs);
    assert!(report.warning.is_some());
}

#[test]
fn point_set_noise_only_touches_corrupted_pairs() {
    let data = gen_point_set_views(&PointSetConfig::standard(2)).unwrap();
    for (v, set) in data.corrupted.iter().enumerate() {
        let delta = &data.views.deltas()[v];
        for i in 0..25 {
            for j in 0..25 {
                let touched = i != j && (set.contains(&i) || set.contains(&j));
                if touched {
                    assert_eq!(data.perturbations[v][(i, j)].abs(), 10.0);
                } else {
                    assert!((delta[(i, j)] - data.clean[(i, j)]).abs() < 1e-12);
                }
            }
        }
    }
    assert_eq!(data.noisy_points(), vec![0, 1, 2, 3, 23, 24]);
}

#[test]
fn clean_clusters_retrieve_perfectly() {
    let cfg = ClusterRetrievalConfig::new(9, 11, vec![0.0, 0.0], 6);
    let data = gen_cluster_retrieval_views(&cfg).unwrap();
    for delta in data.views.deltas() {
        let score = retrieval_topk(delta, &data.labels, 10).unwrap();
        assert_eq!(score.total, 99 * 10);
    }
}

#[test]
fn cluster_corruptions_are_disjoint() {
    let cfg = ClusterRetrievalConfig::new(9, 11, vec![0.2, 0.3], 6);
    let data = gen_cluster_retrieval_views(&cfg).unwrap();
    assert_eq!(data.corrupted[0].len(), 20);
    assert_eq!(data.corrupted[1].len(), 30);
    assert!(data.corrupted[0].iter().all(|i| !data.corrupted[1].contains(i)));
}

#[test]
fn noiseless_classes_are_separable_by_nearest_neighbour() {
    let mut cfg = LabeledMultiViewConfig::new(5, 20, vec![6], 3, 2);
    cfg.view_noise = 0.0;
    cfg.spread = 0.05;
    let data = gen_labeled_multiview(&cfg).unwrap();
    let split = LabeledSplit::stratified(data.labels.clone(), 0.5, 0).unwrap();
    let out = knn_classify_features(&data.features.view(0).transpose(), &split, 1).unwrap();
    assert_eq!(out.accuracy, 1.0);
}

#[test]
fn generated_views_have_unit_mean_squared_norm() {
    let accs: Vec<f64> = (0..5)
        .map(|s| {
            let fs = labeled(s);
            fs.view(1).norm_squared() / fs.n_instances() as f64
        })
        .collect();
    assert!((median(accs) - 1.0).abs() < 1e-12);
}
