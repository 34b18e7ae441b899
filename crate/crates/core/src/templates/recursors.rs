//! The four higher-order recursors.

use alloc::string::String;

use crate::kernel::ProofStep;
use crate::parse;
use crate::program::Program;

pub const RECURSOR_NAMES: [&str; 4] = ["tailup", "taildn", "recup", "recdn"];

pub const RECURSORS: &str = "\
fun tailup, taildn, recup, recdn :: (Int -> Int -> Int) -> Int -> Int -> Int -> Int;
rule tailup f i y a -> a [i > y];
rule tailup f i y a -> tailup f (i + 1) y (f i a) [i <= y];
rule taildn f x i a -> a [i < x];
rule taildn f x i a -> taildn f x (i - 1) (f a i) [i >= x];
rule recup f i y z -> z [i > y];
rule recup f i y z -> f (recup f (i + 1) y z) i [i <= y];
rule recdn f x i z -> z [i < x];
rule recdn f x i z -> f i (recdn f x (i - 1) z) [i >= x];
";

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum InstallError {
    #[error("symbol `{0}` is already declared")]
    NameClash(String),
}

/// True iff the program declares all four recursors with exactly their rules.
pub fn has_recursors(program: &Program) -> bool {
    let mut reference = Program::new();
    parse::parse_into(&mut reference, RECURSORS).expect("recursor source parses");
    RECURSOR_NAMES.iter().all(|n| {
        program.lookup(n) == reference.lookup(n)
            && program.rules_for(n).count() == 2
            && program
                .rules_for(n)
                .zip(reference.rules_for(n))
                .all(|(a, b)| super::matching::same_rule(a, b))
    })
}

/// Adds the recursors and their eight rules.
pub fn install_recursors(program: &Program) -> Result<Program, InstallError> {
    if let Some(n) = RECURSOR_NAMES.iter().find(|n| program.lookup(n).is_some()) {
        return Err(InstallError::NameClash(String::from(*n)));
    }
    let mut p = program.clone();
    parse::parse_into(&mut p, RECURSORS).expect("recursor names are fresh");
    Ok(p)
}

/// The kernel step that installs the recursors inside a proof.
pub fn install_step() -> ProofStep {
    ProofStep::Define {
        source: String::from(RECURSORS),
        synthesized: false,
    }
}

/// Index of the base (`recursive == false`) or recursive rule of recursor `name`.
pub fn recursor_rule(program: &Program, name: &str, recursive: bool) -> Option<usize> {
    program
        .rules()
        .iter()
        .position(|r| &*r.root().name == name && r.rhs.contains_symbol(&|s| s.fun_name() == Some(name)) == recursive)
}
