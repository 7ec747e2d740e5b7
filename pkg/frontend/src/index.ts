export { FIGURE_KINDS, FigureKind } from "./figures.js";
export {
  achievableLoadFigure,
  overheadLoadFprFigure,
  throughputSpeedupFigure,
  timeMemoryFigure,
  walkHistFigure,
} from "./figures.js";
export {
  buildOption,
  kindForFile,
  normalizeSvgClasses,
  optionToSvg,
  renderAll,
  renderFigure,
  svgToPng,
} from "./render.js";
export {
  ExperimentRecord,
  RECORD_COLUMNS,
  WalkBin,
  WALK_BIN_COLUMNS,
  parseRecords,
  parseWalkBins,
} from "./schema.js";
export { BUCKET_THRESHOLDS, WINDOW_THRESHOLDS, loadThreshold } from "./thresholds.js";
