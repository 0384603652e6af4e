//! The nine-qubit toy device: four overlapping three-atom cells, routing by
//! in-cell state exchanges, the compiled Fourier transform, and a register
//! simulator running either exact gates or synthesized pulse schedules.

mod program;
mod routing;
mod simulate;
mod topology;

pub use program::{bit_reversal_program, qft_program, CellOp, CompiledProgram, Step};
pub use routing::{exchange_op, route_pair, routed_gate, Route};
pub use simulate::{
    aligned_max_deviation, apply_program, dft_reference, program_unitary, Backend, Mode,
    RegisterState, ScheduleBook, REGISTER_DIM,
};
pub use topology::{CellId, DeviceTopology};
