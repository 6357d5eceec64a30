//! IRI constants for every vocabulary the engine speaks.
//!
//! The workflow vocabulary models workflows as trees of activities with
//! list-valued children, instances of workflows and activities as separate
//! resources, and a four-state lifecycle per instance. The `sp` terms carry
//! ASK query text and materialized boolean results; the `httpv`/`httpm`
//! terms describe HTTP requests inside rule heads.

pub mod wild {
    pub const NS: &str = "http://purl.org/wild/vocab#";

    pub const WORKFLOW: &str = "http://purl.org/wild/vocab#Workflow";
    pub const WORKFLOW_INSTANCE: &str = "http://purl.org/wild/vocab#WorkflowInstance";
    pub const ACTIVITY: &str = "http://purl.org/wild/vocab#Activity";
    pub const ACTIVITY_INSTANCE: &str = "http://purl.org/wild/vocab#ActivityInstance";
    pub const ATOMIC_ACTIVITY: &str = "http://purl.org/wild/vocab#AtomicActivity";
    pub const COMPOSITE_ACTIVITY: &str = "http://purl.org/wild/vocab#CompositeActivity";
    pub const SEQUENTIAL_ACTIVITY: &str = "http://purl.org/wild/vocab#SequentialActivity";
    pub const PARALLEL_ACTIVITY: &str = "http://purl.org/wild/vocab#ParallelActivity";
    pub const CONDITIONAL_ACTIVITY: &str = "http://purl.org/wild/vocab#ConditionalActivity";

    pub const HAS_BEHAVIOUR: &str = "http://purl.org/wild/vocab#hasBehaviour";
    pub const HAS_CHILD_ACTIVITIES: &str = "http://purl.org/wild/vocab#hasChildActivities";
    pub const HAS_CHILD_ACTIVITY: &str = "http://purl.org/wild/vocab#hasChildActivity";
    pub const HAS_DESCENDANT_ACTIVITY: &str =
        "http://purl.org/wild/vocab#hasDescendantActivity";
    pub const WORKFLOW_INSTANCE_OF: &str = "http://purl.org/wild/vocab#workflowInstanceOf";
    pub const ACTIVITY_INSTANCE_OF: &str = "http://purl.org/wild/vocab#activityInstanceOf";
    pub const IN_WORKFLOW_INSTANCE: &str = "http://purl.org/wild/vocab#inWorkflowInstance";
    pub const HAS_STATE: &str = "http://purl.org/wild/vocab#hasState";
    pub const HAS_PRECONDITION: &str = "http://purl.org/wild/vocab#hasPrecondition";
    pub const HAS_POSTCONDITION: &str = "http://purl.org/wild/vocab#hasPostcondition";
    pub const HAS_HTTP_REQUEST: &str = "http://purl.org/wild/vocab#hasHttpRequest";

    pub const UNINITIALISED: &str = "http://purl.org/wild/vocab#uninitialised";
    pub const INITIALISED: &str = "http://purl.org/wild/vocab#initialised";
    pub const ACTIVE: &str = "http://purl.org/wild/vocab#active";
    pub const DONE: &str = "http://purl.org/wild/vocab#done";

    /// Marks an instance whose list predecessors up to and including itself
    /// are done; drives completion of parallel groups.
    pub const DONE_FROM_LIST_ITEM_ONE: &str =
        "http://purl.org/wild/vocab#doneFromListItemOne";
    /// Marks an instance whose list predecessors up to and including itself
    /// are at least initialised; drives activation of conditional groups.
    pub const INITIALISED_FROM_LIST_ITEM_ONE: &str =
        "http://purl.org/wild/vocab#initialisedFromListItemOne";

    /// Internal helper chaining from an activity to each cell of its child
    /// list; `hasChildActivity` is derived from it.
    pub const CHILD_CELL: &str = "http://purl.org/wild/vocab#childCell";
    /// Ties an emitted request to the activity instance it acts for.
    pub const ON_BEHALF_OF: &str = "http://purl.org/wild/vocab#onBehalfOf";
}

pub mod sp {
    pub const NS: &str = "http://spinrdf.org/sp#";
    pub const TEXT: &str = "http://spinrdf.org/sp#text";
    pub const HAS_BOOLEAN_RESULT: &str = "http://spinrdf.org/sp#hasBooleanResult";
}

pub mod httpv {
    pub const NS: &str = "http://www.w3.org/2011/http#";
    pub const MTHD: &str = "http://www.w3.org/2011/http#mthd";
    pub const REQUEST_URI: &str = "http://www.w3.org/2011/http#requestURI";
    pub const BODY: &str = "http://www.w3.org/2011/http#body";
}

pub mod ldp {
    pub const NS: &str = "http://www.w3.org/ns/ldp#";
    pub const CONTAINS: &str = "http://www.w3.org/ns/ldp#contains";
    pub const BASIC_CONTAINER: &str = "http://www.w3.org/ns/ldp#BasicContainer";
    pub const RESOURCE: &str = "http://www.w3.org/ns/ldp#Resource";
    pub const RDF_SOURCE: &str = "http://www.w3.org/ns/ldp#RDFSource";
}

pub mod rdfs {
    pub const NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
    pub const SUB_CLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
    pub const SUB_PROPERTY_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subPropertyOf";
    pub const DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
    pub const RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
    pub const LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
}

pub mod owl {
    pub const NS: &str = "http://www.w3.org/2002/07/owl#";
    pub const INVERSE_OF: &str = "http://www.w3.org/2002/07/owl#inverseOf";
}

pub mod ssn {
    pub const NS: &str = "http://www.w3.org/ns/ssn/";
    pub const HAS_VALUE: &str = "http://www.w3.org/ns/ssn/hasValue";
}

pub mod brick {
    pub const NS: &str = "https://brickschema.org/schema/Brick#";
    pub const ROOM: &str = "https://brickschema.org/schema/Brick#Room";
    pub const LUMINAIRE: &str = "https://brickschema.org/schema/Brick#Luminaire";
    pub const SWITCH: &str = "https://brickschema.org/schema/Brick#Switch";
    pub const HAS_LOCATION: &str = "https://brickschema.org/schema/Brick#hasLocation";
    pub const IS_LOCATION_OF: &str = "https://brickschema.org/schema/Brick#isLocationOf";
}
