//! Problem sources: Matrix Market files, sequence directories and the
//! synthetic diffusion generator.

pub mod diffusion;
pub mod matrix_market;
pub mod sequence;

pub use diffusion::{diffusion_matrix, diffusion_rhs, diffusion_sequence, gen_diffusion_sequence, DiffusionSequenceSpec};
pub use matrix_market::{read_matrix, read_vector, write_matrix, write_vector, MmStorage};
pub use sequence::{read_sequence, write_sequence};
