import { describe, expect, it, vi } from 'vitest';

import { ApiError } from '../src/api.js';
import type { AnswerPayload, ItemPayload, SessionInfo } from '../src/api.js';
import { TestController, isNumericText } from '../src/state.js';

/** In-memory stand-in for the service: six one-item nodes, grade 0.75. */
function fakeService(total = 6, finalGrade = 0.75) {
  let answered = 0;
  return {
    createSession: vi.fn(
      async (): Promise<SessionInfo> => ({ session_id: 'sess-1', answered: 0, total }),
    ),
    currentItem: vi.fn(
      async (): Promise<ItemPayload> => ({
        prompt: `question ${answered + 1}`,
        answered,
        total,
        finished: false,
      }),
    ),
    submitAnswer: vi.fn(async (): Promise<AnswerPayload> => {
      answered += 1;
      const finished = answered === total;
      return {
        accepted: true,
        finished,
        answered,
        total,
        ...(finished ? { grade: finalGrade } : {}),
      };
    }),
  };
}

describe('numeric input validation', () => {
  it.each(['5', '-3.5', '+.25', '1e-4', '2.5E3', ' 42 ', '173.59375'])(
    'accepts %s',
    (text) => {
      expect(isNumericText(text)).toBe(true);
    },
  );

  it.each(['', '  ', 'abc', '1.2.3', '1e', '--5', '2+3', 'NaN', '1 2', '0x10'])(
    'rejects %j',
    (text) => {
      expect(isNumericText(text)).toBe(false);
    },
  );
});

describe('starting a test', () => {
  it('creates a session and shows the first item', async () => {
    const service = fakeService();
    const controller = new TestController(service);
    const state = await controller.start('demo', 'alice');
    expect(state.phase).toBe('question');
    expect(state.prompt).toBe('question 1');
    expect(state.answered).toBe(0);
    expect(state.total).toBe(6);
  });

  it('renders a retryable error for an unknown test id', async () => {
    const service = fakeService();
    service.createSession.mockRejectedValueOnce(new ApiError("unknown test 'nope'", 404));
    const controller = new TestController(service);
    const state = await controller.start('nope', 'alice');
    expect(state.phase).toBe('error');
    expect(state.sessionId).toBeNull();
    expect(state.message).toContain('could not start');
  });

  it('marks network failures as retryable', async () => {
    const service = fakeService();
    service.createSession.mockRejectedValueOnce(new ApiError('service unreachable'));
    const controller = new TestController(service);
    const state = await controller.start('demo', 'alice');
    expect(state.phase).toBe('error');
    expect(state.retryable).toBe(true);
    expect(state.message).toContain('try again');
  });

  it('refresh re-renders the same item', async () => {
    const service = fakeService();
    const controller = new TestController(service);
    await controller.start('demo', 'alice');
    const before = { ...controller.state };
    const after = await controller.refresh();
    expect(after.prompt).toBe(before.prompt);
    expect(after.answered).toBe(before.answered);
    expect(service.currentItem).toHaveBeenCalledTimes(2);
  });
});

describe('submitting answers', () => {
  it('blocks empty input without any request', async () => {
    const service = fakeService();
    const controller = new TestController(service);
    await controller.start('demo', 'alice');
    controller.setInput('   ');
    const state = await controller.submit();
    expect(service.submitAnswer).not.toHaveBeenCalled();
    expect(state.message).toContain('required');
    expect(state.phase).toBe('question');
  });

  it('blocks non-numeric input without any request', async () => {
    const service = fakeService();
    const controller = new TestController(service);
    await controller.start('demo', 'alice');
    for (const bad of ['abc', '1.2.3', '2+3']) {
      controller.setInput(bad);
      const state = await controller.submit();
      expect(state.message).toContain('not a number');
    }
    expect(service.submitAnswer).not.toHaveBeenCalled();
  });

  it('advances progress by one per answer', async () => {
    const service = fakeService();
    const controller = new TestController(service);
    await controller.start('demo', 'alice');
    controller.setInput('42');
    const state = await controller.submit();
    expect(service.submitAnswer).toHaveBeenCalledWith('sess-1', 42);
    expect(state.answered).toBe(1);
    expect(state.prompt).toBe('question 2');
    expect(state.input).toBe('');
  });

  it('never reveals per-item correctness mid-test', async () => {
    const service = fakeService();
    const controller = new TestController(service);
    await controller.start('demo', 'alice');
    controller.setInput('42');
    const state = await controller.submit();
    const serialized = JSON.stringify(state);
    expect(serialized).not.toContain('correct');
    expect(serialized).not.toContain('level');
    expect(serialized).not.toContain('grade":0');
  });

  it('progress never decreases even on stale payloads', async () => {
    const service = fakeService();
    const controller = new TestController(service);
    await controller.start('demo', 'alice');
    controller.setInput('1');
    await controller.submit();
    controller.setInput('2');
    await controller.submit();
    expect(controller.state.answered).toBe(2);
    // a delayed, out-of-date item payload arrives afterwards
    service.currentItem.mockResolvedValueOnce({
      prompt: 'question 3',
      answered: 0,
      total: 6,
      finished: false,
    });
    const state = await controller.refresh();
    expect(state.answered).toBe(2);
  });

  it('shows the service grade when the test finishes', async () => {
    const service = fakeService(2, 0.5);
    const controller = new TestController(service);
    await controller.start('demo', 'alice');
    controller.setInput('1');
    await controller.submit();
    controller.setInput('2');
    const state = await controller.submit();
    expect(state.phase).toBe('finished');
    expect(state.grade).toBe(0.5);
  });

  it('keeps the answer re-submittable after a network failure', async () => {
    const service = fakeService();
    const controller = new TestController(service);
    await controller.start('demo', 'alice');
    service.submitAnswer.mockRejectedValueOnce(new ApiError('service unreachable'));
    controller.setInput('42');
    let state = await controller.submit();
    expect(state.phase).toBe('question');
    expect(state.input).toBe('42');
    expect(state.message).toContain('submit again');
    state = await controller.submit();
    expect(state.answered).toBe(1);
    expect(service.submitAnswer).toHaveBeenCalledTimes(2);
  });

  it('ignores a second submit while one is in flight', async () => {
    const service = fakeService();
    const controller = new TestController(service);
    await controller.start('demo', 'alice');
    let release!: (v: AnswerPayload) => void;
    service.submitAnswer.mockImplementationOnce(
      () => new Promise<AnswerPayload>((resolve) => (release = resolve)),
    );
    controller.setInput('42');
    const first = controller.submit();
    const second = await controller.submit(); // dropped: request pending
    expect(second.phase).toBe('submitting');
    expect(service.submitAnswer).toHaveBeenCalledTimes(1);
    release({ accepted: true, finished: false, answered: 1, total: 6 });
    await first;
    expect(controller.state.answered).toBe(1);
  });
});
