// SPDX-License-Identifier: Apache-2.0

use std::time::Duration;

use harmnet_service::{serve, AppState, Settings};

use crate::args::ServeArgs;
use crate::{load, CliError, CliResult, Ctx};

/// Binds first and loads the graph afterwards, so clients see 503 rather than
/// a refused connection while a large graph is read.
pub(crate) fn run(ctx: &mut Ctx, a: &ServeArgs) -> CliResult<()> {
    let mut settings = Settings {
        session_ttl: Duration::from_secs(a.session_ttl),
        ranking_timeout: Duration::from_secs(a.ranking_timeout),
        cors_origins: a.cors_origin.clone(),
        ..Settings::default()
    };
    if let Some(w) = a.workers {
        settings.workers = w.max(1);
    }
    let state = AppState::new(settings);
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Failed(e.to_string()))?;
    let addr = format!("{}:{}", a.host, a.port);
    let listener = rt
        .block_on(tokio::net::TcpListener::bind(&addr))
        .map_err(|e| CliError::Failed(format!("cannot bind {addr}: {e}")))?;
    let bound = listener.local_addr().map_err(|e| CliError::Failed(e.to_string()))?;
    let server = rt.spawn(serve(listener, state.clone()));
    ctx.print(&format!("listening on http://{bound}\n"))?;
    let _ = ctx.stdout.flush();

    let loaded = load(&a.source)?;
    ctx.print(&format!(
        "loaded {} ({} nodes, {} edges)\n",
        loaded.inputs.join(", "),
        loaded.graph.node_count(),
        loaded.graph.edge_count()
    ))?;
    let _ = ctx.stdout.flush();
    state.set_graph(loaded.graph);

    rt.block_on(server)
        .map_err(|e| CliError::Failed(e.to_string()))?
        .map_err(|e| CliError::Failed(format!("server stopped: {e}")))
}
