//! System prompts, shipped as data files and embedded verbatim.

pub const INTERPRETATION_SYSTEM_PROMPT: &str = include_str!("../prompts/interpretation_system.txt");
pub const SUGGESTION_SYSTEM_PROMPT: &str = include_str!("../prompts/suggestion_system.txt");
