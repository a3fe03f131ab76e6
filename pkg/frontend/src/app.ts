/** DOM shell: renders the controller state and wires the single input form. */
import { TestController } from './state.js';
import type { ViewState } from './state.js';

export interface AppHandles {
  controller: TestController;
  render: (state: ViewState) => void;
  root: HTMLElement;
}

export function mountApp(root: HTMLElement, controller: TestController): AppHandles {
  root.innerHTML = `
    <div class="lattice-test">
      <pre id="prompt"></pre>
      <p id="progress" aria-label="progress"></p>
      <form id="answer-form">
        <label for="answer">Answer:</label>
        <input id="answer" name="answer" autocomplete="off" inputmode="decimal" />
        <button id="submit" type="submit">Submit</button>
      </form>
      <p id="message" role="alert"></p>
      <div id="result" hidden>
        <h2>Test finished</h2>
        <p id="grade"></p>
      </div>
    </div>
  `;

  const prompt = root.querySelector<HTMLPreElement>('#prompt')!;
  const progress = root.querySelector<HTMLParagraphElement>('#progress')!;
  const form = root.querySelector<HTMLFormElement>('#answer-form')!;
  const input = root.querySelector<HTMLInputElement>('#answer')!;
  const submit = root.querySelector<HTMLButtonElement>('#submit')!;
  const message = root.querySelector<HTMLParagraphElement>('#message')!;
  const result = root.querySelector<HTMLDivElement>('#result')!;
  const gradeLine = root.querySelector<HTMLParagraphElement>('#grade')!;

  function render(state: ViewState): void {
    prompt.textContent = state.prompt;
    progress.textContent = state.total > 0 ? `${state.answered}/${state.total}` : '';
    message.textContent = state.message;
    const answering = state.phase === 'question';
    input.disabled = !answering;
    submit.disabled = !answering;
    if (input.value !== state.input) input.value = state.input;
    form.hidden = state.phase === 'finished' || state.phase === 'error';
    result.hidden = state.phase !== 'finished';
    if (state.phase === 'finished' && state.grade !== null) {
      gradeLine.textContent = `Final grade: ${state.grade.toFixed(4)}`;
    }
  }

  input.addEventListener('input', () => {
    controller.setInput(input.value);
  });
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const done = controller.submit();
    render(controller.state); // paint the in-flight state: input and button lock
    void done.then(render);
  });

  render(controller.state);
  return { controller, render, root };
}

export async function startApp(
  handles: AppHandles,
  testId: string,
  studentKey: string,
): Promise<ViewState> {
  const state = await handles.controller.start(testId, studentKey);
  handles.render(state);
  return state;
}
