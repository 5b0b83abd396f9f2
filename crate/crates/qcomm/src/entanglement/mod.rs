//! Decomposing shared states into locally simple pieces, and compilers that
//! remove shared entanglement from simultaneous and one-way protocols.

mod decompose;
mod oneway;
mod qsmp;

pub use decompose::{
    canonical_state, classify_pair, classify_pair_with_phase, decompose, pair_state,
    verify_decomposition, ComponentDoc, ComponentKind, Decomposition, DecompositionDoc,
    DecompositionReport, PairClass, Phase, SimpleComponent,
};
pub use oneway::{
    cost_account, entry_average, epr_measurement_protocol, quantize, sample_stripped_oneway,
    strip_entanglement_oneway, CostAccount, StrippedOneWay,
};
pub use qsmp::{
    epr_parity_protocol, random_entangled_smp, simulate_qsmp, strip_entanglement_qsmp,
    EntangledSmpProtocol, QsmpShots, StrippedQsmp,
};
