//! Recursion templates, recursors, and the recursor lemma bank.

pub mod auto;
pub mod bank;
pub mod emit;
pub mod matching;
pub mod recursors;
pub mod tactics;

pub use auto::{auto_prove, auto_prove_all, auto_prove_from, one_sided_from, search, two_sided_from, AutoConfig, AutoResult, Strategy};
pub use bank::{compile, lemma, lemma_bank, Instantiation, LemmaId, RecursorLemma};
pub use emit::{emit_template_recursor_lemma, setup_steps, template_equation};
pub use matching::{
    match_all, match_template, normalize_guard, normalize_inequalities, synthesized_definition, FunctionSymbol, TemplateKind, TemplateMatch,
};
pub use recursors::{has_recursors, install_recursors, install_step, recursor_rule, InstallError, RECURSORS};
pub use tactics::{entries_for, tactic_one_sided, tactic_two_sided, term_matches, TwoSidedFailure};
