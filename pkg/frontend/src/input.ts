// Torque input: key-hold ramps the commanded torque, release decays it back
// to zero; a gamepad steering axis overrides the keyboard when deflected.
// The shared-control math is torque-based, so keys map to torque, not angle.

export interface TorqueInputOptions {
  rampRate?: number; // N m per second while a key is held
  maxTorque?: number; // command cap
  decayTime?: number; // seconds from cap back to zero after release
  deadzone?: number; // gamepad axis deadzone
}

export class TorqueInput {
  readonly rampRate: number;
  readonly maxTorque: number;
  readonly decayRate: number;
  readonly deadzone: number;

  private keyboardTorque = 0;
  private direction = 0; // -1 left, 0 none, +1 right
  private gamepadAxis: number | null = null;

  constructor(options: TorqueInputOptions = {}) {
    this.rampRate = options.rampRate ?? 4.0;
    this.maxTorque = options.maxTorque ?? 5.0;
    this.decayRate = this.maxTorque / (options.decayTime ?? 0.5);
    this.deadzone = options.deadzone ?? 0.08;
  }

  keyDown(key: string): void {
    if (key === 'ArrowRight' || key === 'd') this.direction = 1;
    else if (key === 'ArrowLeft' || key === 'a') this.direction = -1;
  }

  keyUp(key: string): void {
    if ((key === 'ArrowRight' || key === 'd') && this.direction === 1) this.direction = 0;
    else if ((key === 'ArrowLeft' || key === 'a') && this.direction === -1) this.direction = 0;
  }

  setGamepadAxis(axis: number | null): void {
    this.gamepadAxis = axis !== null && Math.abs(axis) > this.deadzone ? axis : null;
  }

  /** Advance the ramp/decay by dt seconds. */
  update(dt: number): void {
    if (this.direction !== 0) {
      const target = this.direction * this.maxTorque;
      const step = this.rampRate * dt;
      if (this.keyboardTorque < target) {
        this.keyboardTorque = Math.min(this.keyboardTorque + step, target);
      } else {
        this.keyboardTorque = Math.max(this.keyboardTorque - step, target);
      }
    } else if (this.keyboardTorque !== 0) {
      const step = this.decayRate * dt;
      if (this.keyboardTorque > 0) {
        this.keyboardTorque = Math.max(0, this.keyboardTorque - step);
      } else {
        this.keyboardTorque = Math.min(0, this.keyboardTorque + step);
      }
      // float dust from the subtractive decay must still read as released
      if (Math.abs(this.keyboardTorque) < 1e-9) this.keyboardTorque = 0;
    }
  }

  get torque(): number {
    if (this.gamepadAxis !== null) {
      return Math.max(-this.maxTorque, Math.min(this.maxTorque, this.gamepadAxis * this.maxTorque));
    }
    return this.keyboardTorque;
  }

  /** True while the user is actively steering (commands should stream). */
  get active(): boolean {
    return this.direction !== 0 || this.keyboardTorque !== 0 || this.gamepadAxis !== null;
  }
}
