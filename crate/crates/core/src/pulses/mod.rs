//! Pulse envelopes, DRAG correction, frame-phase ledger and AWG waveforms.

pub mod drag;
pub mod envelope;
pub mod ledger;
pub mod waveform;

pub use drag::{drag_correct, drag_correct_with, rotate_iq, DragOptions, DragSolution};
pub use envelope::{sample, sample_times, Envelope, EnvelopeSpec, FlatTop, Gaussian, DEFAULT_RAMP_OFFSET, DEFAULT_RAMP_RATE};
pub use ledger::{gate_phase_to_drive_phase, phase_trick_drive_phase, phase_trick_solutions, LedgerEntry, PhaseLedger, Segment};
pub use waveform::{IQWaveform, DEFAULT_SAMPLE_RATE};
