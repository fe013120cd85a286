//! The verifier/prover simulation: machine models, the verifier loop with
//! the decohering switch, transcripts, and transcript discrimination.
//!
//! The verifier only poses the CHSH questions and checks answers; the
//! distributional identity between separable and monolithic machines
//! illustrates, but does not prove, why independence of provers cannot be
//! verified.

mod discriminate;
mod machine;
mod run;
mod transcript;

pub use discriminate::{
    chi_square_homogeneity, chi_square_p_value, claim_from_estimate, discriminate,
    verifier_separability_claim, Decision, DiscriminationVerdict, SeparabilityClaim, CERTIFY_SIGMAS,
    DEFAULT_ALPHA, MIN_EXPECTED,
};
pub use machine::{monolithic_distribution, purify, LocalSampler, MachineKind, MachineSpec};
pub use run::{marginal_equivalence_check, opaque_label, run_protocol};
pub use transcript::{MachineLabel, RoundRecord, Transcript, TRANSCRIPT_MAGIC};
