//! Particle-field Hamiltonians on the truncated product space, with complex
//! deformation and a sharp infrared split of the interaction.

pub mod coupling;
pub mod hamiltonian;
pub mod spec;

pub use coupling::{coupling_profile, coupling_profile_dtheta, cut_index, radial_coupling, Window};
pub use hamiltonian::{build_hamiltonian, check_idempotent, DeformedHamiltonian, Model, Part, ProductSpace, DEFAULT_DIM_CAP};
pub use spec::{FormFactor, ModelKind, ModelSpec, ParticleSystem};
