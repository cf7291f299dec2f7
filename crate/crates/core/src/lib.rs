//! Template-based optimization of NOT/CNOT/controlled-V circuits.

pub mod compact;
pub mod decompose;
pub mod discover;
pub mod format;
pub mod ir;
pub mod optimizer;
pub mod oracle;
pub mod pipeline;
pub mod template;
