//! Admissible graphs of the cubic interaction and their power counting.

pub mod enumerate;
pub mod power;
pub mod record;

pub use enumerate::{
    admissibility_witness, collapse_graph, enumerate_admissible, enumerate_admissible_capped, enumerate_filtered, free_trees,
    is_admissible, DEFAULT_CAP,
};
pub use power::{
    degree_of_divergence, divergent_graphs, finiteness_certificate, profile_satisfies_lemmas, ratio_sequences,
    realizable_profiles, rho, rho_bound, threshold, verify_valency_lemmas, Certificate, DivergenceReport,
};
pub use record::{canonical_labeling, GraphRecord, Profile, Provenance};

/// Nine vertices and fourteen edges: a 9-cycle with the chords and doubled
/// edges that push `L` up to just below `19N/12`.
pub fn extremal_n9() -> GraphRecord {
    let mut e: Vec<(usize, usize)> = (0..9).map(|i| (i, (i + 1) % 9)).collect();
    e.extend([(0, 8), (8, 7), (7, 6), (0, 6), (1, 2)]);
    GraphRecord::new(9, &e)
}

pub const CSV_HEADER: &str = "n,l,n2,n3,n4,rho,ambiguity_dim,key";

pub fn csv_row(r: &DivergenceReport) -> String {
    let p = r.graph.profile();
    format!("{},{},{},{},{},{},{},{}", p.n, p.l, p.n2, p.n3, p.n4, r.rho, r.ambiguity_dim, r.graph.key())
}
