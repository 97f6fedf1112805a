pub mod embed;
pub mod eval;
pub mod fit;
pub mod recipe;
pub mod synth;

use std::path::PathBuf;

use crate::Context;

/// Input files from the flags, or from the manifest when none were given.
pub(crate) fn views_or_manifest(ctx: &Context, flags: Vec<PathBuf>) -> Vec<PathBuf> {
    if flags.is_empty() {
        ctx.manifest.as_ref().map(|m| m.views.clone()).unwrap_or_default()
    } else {
        flags
    }
}
