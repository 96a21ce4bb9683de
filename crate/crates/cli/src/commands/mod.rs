pub mod evaluate;
pub mod gen_negatives;
pub mod init_grammar;
pub mod parse;
pub mod predict_contacts;
pub mod score;
pub mod train;
