pub mod num;
pub mod rootsys;
pub mod superalg;
pub mod chevalley;
pub mod realize;
pub mod compare;
pub mod cli;
