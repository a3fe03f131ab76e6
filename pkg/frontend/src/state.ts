/**
 * View state machine for taking a test, one item at a time.
 *
 * All grading and progress values come from the service; the client never
 * computes them locally, never learns the item level or current column,
 * and never shows per-item correctness while the test runs.
 */
import { ApiError } from './api.js';
import type { AnswerPayload, ItemPayload, ServiceClient, SessionInfo } from './api.js';

export type Phase = 'idle' | 'loading' | 'question' | 'submitting' | 'finished' | 'error';

export interface ViewState {
  phase: Phase;
  sessionId: string | null;
  prompt: string;
  answered: number;
  total: number;
  input: string;
  grade: number | null;
  message: string;
  retryable: boolean;
}

/** Plain number: optional sign, digits with optional decimal point, optional exponent. */
const NUMERIC_TEXT = /^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$/;

export function isNumericText(text: string): boolean {
  return NUMERIC_TEXT.test(text.trim());
}

function initialState(): ViewState {
  return {
    phase: 'idle',
    sessionId: null,
    prompt: '',
    answered: 0,
    total: 0,
    input: '',
    grade: null,
    message: '',
    retryable: false,
  };
}

type Client = Pick<ServiceClient, 'createSession' | 'currentItem' | 'submitAnswer'>;

export class TestController {
  state: ViewState = initialState();
  private inFlight = false;

  constructor(private readonly client: Client) {}

  /** Create a session and render its first item. */
  async start(testId: string, studentKey: string): Promise<ViewState> {
    this.state = { ...initialState(), phase: 'loading' };
    let session: SessionInfo;
    try {
      session = await this.client.createSession(testId, studentKey);
    } catch (err) {
      return this.fail(err, 'could not start the test');
    }
    this.state.sessionId = session.session_id;
    this.state.total = session.total;
    return this.refresh();
  }

  /** Re-fetch the current item; safe after a reload, the item is unchanged. */
  async refresh(): Promise<ViewState> {
    if (this.state.sessionId === null) return this.state;
    let item: ItemPayload;
    try {
      item = await this.client.currentItem(this.state.sessionId);
    } catch (err) {
      return this.fail(err, 'could not fetch the next item');
    }
    this.state.phase = 'question';
    this.state.prompt = item.prompt;
    this.applyProgress(item.answered, item.total);
    this.state.message = '';
    return this.state;
  }

  setInput(text: string): ViewState {
    this.state.input = text;
    return this.state;
  }

  /**
   * Validate and post the typed answer.
   *
   * Empty or non-numeric input never leaves the client. While a request is
   * in flight further submits are ignored, so an answer cannot be recorded
   * twice; after a network failure the same input stays in the box and can
   * be re-submitted.
   */
  async submit(): Promise<ViewState> {
    if (this.state.phase !== 'question' || this.inFlight) return this.state;
    const text = this.state.input.trim();
    if (text === '') {
      this.state.message = 'An answer is required: this test has no skip option.';
      return this.state;
    }
    if (!isNumericText(text)) {
      this.state.message = `"${text}" is not a number. Enter digits, an optional sign, decimal point or exponent.`;
      return this.state;
    }
    if (this.state.sessionId === null) return this.state;

    this.inFlight = true;
    this.state.phase = 'submitting';
    let payload: AnswerPayload;
    try {
      payload = await this.client.submitAnswer(this.state.sessionId, Number(text));
    } catch (err) {
      this.inFlight = false;
      this.state.phase = 'question';
      const retryable = err instanceof ApiError ? err.retryable : true;
      this.state.message = retryable
        ? 'The answer could not be sent. Check the connection and submit again.'
        : String(err instanceof Error ? err.message : err);
      this.state.retryable = retryable;
      return this.state;
    }
    this.inFlight = false;
    this.applyProgress(payload.answered, payload.total);
    this.state.input = '';
    this.state.message = '';
    if (payload.finished) {
      this.state.phase = 'finished';
      this.state.grade = payload.grade ?? null;
      this.state.prompt = '';
    } else {
      return this.refresh();
    }
    return this.state;
  }

  private applyProgress(answered: number, total: number): void {
    // progress is monotone: a stale or reordered response may never lower it
    this.state.answered = Math.max(this.state.answered, answered);
    this.state.total = total || this.state.total;
  }

  private fail(err: unknown, context: string): ViewState {
    const retryable = err instanceof ApiError ? err.retryable : true;
    const detail = err instanceof Error ? err.message : String(err);
    this.state.phase = 'error';
    this.state.message = `${context}: ${detail}${retryable ? ' (try again)' : ''}`;
    this.state.retryable = retryable;
    return this.state;
  }
}
