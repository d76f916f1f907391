//! Random fixtures and slow, obviously-correct reference implementations used
//! to cross-check the engine.

pub mod gen;
pub mod oracle;
