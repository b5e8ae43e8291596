pub mod linalg;
pub mod poly;
mod scalar;

pub use poly::{BiPoly, UPoly};
pub use scalar::{
    embedding_bits, is_perfect_square, rational_to_f64, squarefree_decompose,
    working_precision_bits, Embedding, ExactScalar, Rational,
};
