use crate::axioms::AxiomError;
use crate::graph::GraphError;
use crate::lambdag::LgError;
use crate::recursion::RecursionError;
use crate::rewrite::RewriteError;
use crate::syntax::SyntaxError;
use crate::typing::TypeError;

/// Any error raised by the crate.
#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Axiom(#[from] AxiomError),
    #[error(transparent)]
    Recursion(#[from] RecursionError),
    #[error(transparent)]
    Lambda(#[from] LgError),
}
