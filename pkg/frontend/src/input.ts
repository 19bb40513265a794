// Pilot gestures to wire commands: exactly one command per gesture.
// Kept free of DOM types so the mapping is unit-testable.

import { Command, driveCommand, switchCommand } from "./protocol";

export interface DriveState {
  level: number; // last commanded drive in [-1, 1]
}

const DRIVE_STEP = 1.0;

// Arrow hold = full contraction of the corresponding muscle; release = relax.
// Space switches once per press (auto-repeat must be filtered by the caller
// passing `repeat`).
export function keyDownCommand(
  key: string,
  repeat: boolean,
  drive: DriveState,
): Command | null {
  if (repeat) return null;
  switch (key) {
    case "ArrowUp":
      drive.level = DRIVE_STEP;
      return driveCommand(drive.level);
    case "ArrowDown":
      drive.level = -DRIVE_STEP;
      return driveCommand(drive.level);
    case " ":
      return switchCommand();
    default:
      return null;
  }
}

export function keyUpCommand(key: string, drive: DriveState): Command | null {
  if ((key === "ArrowUp" && drive.level > 0) || (key === "ArrowDown" && drive.level < 0)) {
    drive.level = 0;
    return driveCommand(0);
  }
  return null;
}

// Slider position in [-100, 100] percent.
export function sliderCommand(percent: number, drive: DriveState): Command {
  drive.level = Math.max(-1, Math.min(1, percent / 100));
  return driveCommand(drive.level);
}
