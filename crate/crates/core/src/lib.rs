pub mod cli;
pub mod corpus;
pub mod http;
pub mod lexical;
pub mod pipeline;
pub mod report;
pub mod semantic;
pub mod syntax;
