pub mod composition;
pub mod json;
pub mod multiindex;
pub mod outer_seq;
pub mod rdl;
pub mod series;
