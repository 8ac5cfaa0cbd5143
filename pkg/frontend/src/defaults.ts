/**
 * Form defaults extracted from the service's own OpenAPI schema, so the
 * dashboard never hard-codes a value the library could change.
 */

type Schema = Record<string, any>;

export interface FormDefaults {
  [field: string]: unknown;
}

function resolveRef(root: Schema, node: Schema): Schema {
  if (node && typeof node.$ref === 'string') {
    const parts = node.$ref.replace(/^#\//, '').split('/');
    let cur: Schema = root;
    for (const part of parts) cur = cur[part];
    return cur;
  }
  return node;
}

function schemaDefault(root: Schema, prop: Schema): unknown {
  const resolved = resolveRef(root, prop);
  if (resolved === undefined) return undefined;
  if ('default' in resolved) return resolved.default;
  // anyOf with a $ref arm (optional nested models): recurse into the arm
  if (Array.isArray(resolved.anyOf)) {
    for (const arm of resolved.anyOf) {
      const value = schemaDefault(root, arm);
      if (value !== undefined) return value;
    }
  }
  if (resolved.properties) return extractObjectDefaults(root, resolved);
  return undefined;
}

function extractObjectDefaults(root: Schema, objSchema: Schema): FormDefaults {
  const out: FormDefaults = {};
  for (const [name, prop] of Object.entries<Schema>(objSchema.properties ?? {})) {
    const value = schemaDefault(root, prop);
    if (value !== undefined) out[name] = value;
  }
  return out;
}

/** Defaults of one request model, e.g. modelDefaults(spec, 'KSampleRequest'). */
export function modelDefaults(openapi: Schema, modelName: string): FormDefaults {
  const schema = openapi?.components?.schemas?.[modelName];
  if (!schema) throw new Error(`schema ${modelName} not found in openapi document`);
  return extractObjectDefaults(openapi, schema);
}

export function allModelDefaults(openapi: Schema): Record<string, FormDefaults> {
  const out: Record<string, FormDefaults> = {};
  for (const name of Object.keys(openapi?.components?.schemas ?? {})) {
    out[name] = modelDefaults(openapi, name);
  }
  return out;
}
