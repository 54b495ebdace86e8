use std::collections::{BTreeMap, BTreeSet};

use hsurf::phylo::{
    build_forest, export_alife_csv, import_alife_csv, sampled_triplet_error, LeafAnnotation,
};
use hsurf::sim::{self, genomes_csv, read_genomes_csv, sample_end_state, Scheduler, SimConfig};
use hsurf::Policy;

fn tagged_config(seed: u64, generations: u64) -> SimConfig {
    let mut c = SimConfig::default();
    c.grid.seed = seed;
    c.grid.generations = generations;
    c.layout.differentia_bits = 8;
    c
}

#[test]
fn reconstructed_roots_are_founder_clades() {
    for seed in 0..4 {
        let sim = sim::run(tagged_config(seed, 25)).unwrap();
        let csv = genomes_csv(&sim.layout(), &sample_end_state(&sim, 3));
        let (_, leaves) = read_genomes_csv(&csv).unwrap();
        let tree = build_forest(&leaves, false).unwrap();
        let tag_of: BTreeMap<&str, u16> = leaves
            .iter()
            .map(|l| (l.label.as_str(), l.founder_tag.unwrap()))
            .collect();
        let mut root_tags = BTreeSet::new();
        for root in tree.roots() {
            let mut tags = BTreeSet::new();
            for i in tree.preorder().into_iter().filter(|&i| tree.is_leaf(i)) {
                let mut at = i;
                while let Some(p) = tree.parent(at) {
                    at = p;
                }
                if at == root {
                    tags.insert(tag_of[tree.node(i).taxon_label.as_deref().unwrap()]);
                }
            }
            assert_eq!(
                tags.len(),
                1,
                "seed {seed}: root {root} mixes founders {tags:?}"
            );
            root_tags.extend(tags);
        }
        assert_eq!(
            root_tags.len(),
            tree.roots().len(),
            "seed {seed}: a founder split across roots"
        );
        assert_eq!(root_tags, tag_of.values().copied().collect());
    }
}

#[test]
fn reconstruction_tracks_perfect_tree_over_longer_runs() {
    let mut c = tagged_config(5, 400);
    c.layout.policy = Policy::Hybrid;
    c.layout.surface_slots = 64;
    c.track_perfect = true;
    let sim = sim::run(c).unwrap();
    let samples = sample_end_state(&sim, 2);
    let layout = sim.layout();
    let leaves: Vec<LeafAnnotation> = samples
        .iter()
        .map(|s| {
            LeafAnnotation::new(
                layout.annotation(&s.bytes).unwrap().to_records(),
                s.label.clone(),
                None,
            )
        })
        .collect();
    let reference = sim::perfect_tree(&sim, &samples).unwrap();
    let reconstruction = build_forest(&leaves, true).unwrap();
    let report = sampled_triplet_error(&reference, &reconstruction, 2000, 1).unwrap();
    assert!(report.wrong <= 0.1, "{report:?}");
    assert!(report.correct >= 0.5, "{report:?}");
}

#[test]
fn perfect_tree_export_round_trips() {
    let mut c = tagged_config(6, 120);
    c.track_perfect = true;
    let sim = sim::run(c).unwrap();
    let tree = sim::perfect_tree(&sim, &sample_end_state(&sim, 4)).unwrap();
    assert_eq!(tree.leaves().len(), 36);
    let text = export_alife_csv(&tree);
    assert_eq!(import_alife_csv(&text).unwrap(), tree.normalized());
}

#[test]
fn parallel_export_matches_deterministic() {
    let det = sim::run(tagged_config(7, 150)).unwrap();
    let mut c = tagged_config(7, 150);
    c.scheduler = Scheduler::Parallel;
    c.threads = 3;
    let par = sim::run(c).unwrap();
    assert_eq!(
        genomes_csv(&det.layout(), &sample_end_state(&det, 32)),
        genomes_csv(&par.layout(), &sample_end_state(&par, 32))
    );
}
