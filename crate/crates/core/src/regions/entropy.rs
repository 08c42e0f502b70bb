use crate::model::SourceModel;
use crate::subset::Subset;

/// `H(U_{S∩[1,K]} | U_{S^c∩[1,K]})`; the relay index `K+1` carries no source.
pub fn conditional_entropy(src: &SourceModel, s: Subset) -> f64 {
    let k = src.k();
    let sources = Subset::full(k);
    let given = s.complement(k + 1).intersect(sources);
    let h = src.entropy(sources) - src.entropy(given);
    // Chain-rule differences can land a few ulps below zero.
    h.max(0.0)
}
