use std::path::PathBuf;

use clap::{Args, ValueEnum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Args)]
pub struct RunConfig {
    /// X^{2n-1} in P^n, 2 <= n <= 6.
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = -6, allow_hyphen_values = true)]
    pub kmin: i64,
    #[arg(long, default_value_t = 6, allow_hyphen_values = true)]
    pub kmax: i64,
    /// Starting level cutoff; raised automatically when omitted.
    #[arg(long)]
    pub cutoff: Option<i64>,
    /// Truncation order of formal series.
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Extra level raises allowed when no cutoff is given.
pub const AUTO_RAISES: i64 = 2;

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(2..=6).contains(&self.n) {
            return Err(format!("--n must lie in 2..=6, got {}", self.n));
        }
        if self.kmin > self.kmax {
            return Err(format!("--kmin {} exceeds --kmax {}", self.kmin, self.kmax));
        }
        if self.cutoff.is_some_and(|c| c < 0) {
            return Err("--cutoff must be nonnegative".into());
        }
        if self.order == 0 {
            return Err("--order must be at least 1".into());
        }
        Ok(())
    }

    pub fn start_cutoff(&self) -> i64 {
        self.cutoff.unwrap_or(0)
    }

    pub fn context(&self) -> crobs::obstruction::Context {
        let mut ctx = crobs::obstruction::Context::new();
        ctx.extra_cutoff = if self.cutoff.is_some() { 0 } else { AUTO_RAISES };
        ctx
    }
}
