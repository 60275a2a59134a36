pub mod bifdiag;
pub mod monodromy;
pub mod scatter;

use crate::output::Table;

/// Tables to write, and a reliability failure to report after writing them.
pub struct Outcome {
    pub tables: Vec<Table>,
    pub failure: Option<String>,
}
