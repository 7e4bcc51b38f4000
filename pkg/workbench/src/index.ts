export { ApiClient, ApiError, type FetchLike } from "./api.js";
export { WorkbenchApp } from "./app.js";
export { renderHistogram, type ChartModel, type HistogramBar } from "./histogram.js";
export {
  boundsTableModel,
  cliqueBrowserModel,
  consistencyPanelModel,
  runControlsModel,
  statementEditorModel,
} from "./panels.js";
export {
  DEFAULT_PANEL_ORDER,
  DEFAULT_RUN_PARAMS,
  acceptSnapshot,
  initialState,
  staleBadge,
  syncSession,
  type WorkbenchState,
} from "./state.js";
export * from "./types.js";
