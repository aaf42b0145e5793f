/**
 * Trailing-edge debounce: the wrapped function runs once, with the most
 * recent arguments, after `delayMs` of inactivity. Useful for turning a
 * stream of slider input events into a single PUT.
 */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  delayMs: number,
): ((...args: A) => void) & { cancel: () => void; flushNow: () => void } {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let lastArgs: A | null = null;

  const debounced = (...args: A) => {
    lastArgs = args;
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = null;
      const callArgs = lastArgs as A;
      lastArgs = null;
      fn(...callArgs);
    }, delayMs);
  };

  debounced.cancel = () => {
    if (timer !== null) clearTimeout(timer);
    timer = null;
    lastArgs = null;
  };

  debounced.flushNow = () => {
    if (timer !== null) clearTimeout(timer);
    timer = null;
    if (lastArgs !== null) {
      const callArgs = lastArgs;
      lastArgs = null;
      fn(...callArgs);
    }
  };

  return debounced;
}
