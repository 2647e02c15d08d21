pub mod conic;
mod programs;

pub use programs::{
    build_dinkelbach, build_q, build_qhat, charnes_cooper_point, moment_support, RelaxKind, RelaxOptions, Relaxation,
};
